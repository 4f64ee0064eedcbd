#include "nsv/json_io.hpp"

#include "nsv/errors.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace nsv {

namespace {

std::string csv_double(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Relation relation_from_string(const std::string& s)
{
    if (s == "<=")
        return Relation::LessEq;
    if (s == "<")
        return Relation::Less;
    throw ConfigError("unknown relation '" + s + "' (expected \"<=\" or \"<\")");
}

std::string relation_to_string(Relation r)
{
    return r == Relation::LessEq ? "<=" : "<";
}

std::string backend_to_string(BackendKind b)
{
    switch (b) {
    case BackendKind::Builtin:
        return "builtin";
    case BackendKind::Sampler:
        return "sampler";
    case BackendKind::External:
        return "external";
    }
    return "builtin";
}

BackendKind backend_from_string(const std::string& s)
{
    if (s == "builtin")
        return BackendKind::Builtin;
    if (s == "sampler")
        return BackendKind::Sampler;
    if (s == "external")
        return BackendKind::External;
    throw ConfigError("unknown backend '" + s + "'");
}

Json verdict_to_json(const Verdict& v)
{
    Json j;
    j["status"] = to_string(v.status);
    if (v.witness) {
        std::vector<double> w(v.witness->data(), v.witness->data() + v.witness->size());
        j["witness"] = w;
    }
    j["splits"] = v.stats.splits;
    j["time_s"] = v.stats.time_s;
    j["backend"] = v.backend;
    return j;
}

Verdict verdict_from_json_entry(const Json& j)
{
    Verdict v;
    const std::string status = j.at("status").get<std::string>();
    if (status == "sat")
        v.status = Status::Sat;
    else if (status == "unsat")
        v.status = Status::Unsat;
    else if (status == "unknown")
        v.status = Status::Unknown;
    else
        throw ConfigError("unknown verdict status '" + status + "'");
    if (j.contains("witness")) {
        const auto w = j.at("witness").get<std::vector<double>>();
        Eigen::VectorXd vec(static_cast<Eigen::Index>(w.size()));
        for (std::size_t i = 0; i < w.size(); ++i)
            vec[static_cast<Eigen::Index>(i)] = w[i];
        v.witness = std::move(vec);
    }
    v.stats.splits = j.value("splits", std::size_t{0});
    v.stats.time_s = j.value("time_s", 0.0);
    v.backend = j.value("backend", std::string{});
    return v;
}

} // namespace

void require_schema_version(const Json& j, const std::string& what)
{
    if (!j.is_object() || !j.contains("schema_version"))
        throw ConfigError(what + ": missing schema_version");
    if (j.at("schema_version") != kSchemaVersion)
        throw ConfigError(what + ": unsupported schema_version " +
                          j.at("schema_version").dump());
}

Json bounds_to_json(const Box& box)
{
    Json j = Json::array();
    for (const Interval& iv : box.dims())
        j.push_back(Json::array({iv.lo, iv.hi}));
    return j;
}

Box bounds_from_json(const Json& j)
{
    if (!j.is_array() || j.empty())
        throw ConfigError("bounds must be a non-empty array of [lo, hi] pairs");
    std::vector<Interval> dims;
    for (const auto& pair : j) {
        if (!pair.is_array() || pair.size() != 2)
            throw ConfigError("each bound must be a [lo, hi] pair");
        dims.emplace_back(pair[0].get<double>(), pair[1].get<double>());
    }
    return Box(std::move(dims));
}

Json condition_to_json(const OutputCondition& condition)
{
    Json dnf = Json::array();
    for (const Conjunction& conj : condition.dnf) {
        Json c = Json::array();
        for (const LinearInequality& ineq : conj) {
            Json term;
            std::vector<double> coeffs(ineq.coeffs.data(),
                                       ineq.coeffs.data() + ineq.coeffs.size());
            term["coeffs"] = coeffs;
            term["rhs"] = ineq.rhs;
            term["relation"] = relation_to_string(ineq.relation);
            c.push_back(std::move(term));
        }
        dnf.push_back(std::move(c));
    }
    return dnf;
}

OutputCondition condition_from_json(const Json& j)
{
    if (j.is_object()) {
        // ACAS Xu sugar: {"not_maximal": k, "outputs": m} and friends.
        if (!j.contains("outputs"))
            throw ConfigError("condition sugar needs an \"outputs\" count");
        const auto m = j.at("outputs").get<std::size_t>();
        if (j.contains("minimal"))
            return OutputCondition::output_minimal(j.at("minimal").get<std::size_t>(), m);
        if (j.contains("not_minimal"))
            return OutputCondition::output_not_minimal(
                j.at("not_minimal").get<std::size_t>(), m);
        if (j.contains("maximal"))
            return OutputCondition::output_maximal(j.at("maximal").get<std::size_t>(), m);
        if (j.contains("not_maximal"))
            return OutputCondition::output_not_maximal(
                j.at("not_maximal").get<std::size_t>(), m);
        throw ConfigError("unknown condition sugar; expected minimal/not_minimal/"
                          "maximal/not_maximal");
    }

    if (!j.is_array() || j.empty())
        throw ConfigError("condition must be a non-empty DNF array or a sugar object");
    OutputCondition condition;
    for (const auto& conj_json : j) {
        if (!conj_json.is_array())
            throw ConfigError("each DNF disjunct must be an array of inequalities");
        Conjunction conj;
        for (const auto& term : conj_json) {
            const auto coeffs = term.at("coeffs").get<std::vector<double>>();
            Eigen::VectorXd c(static_cast<Eigen::Index>(coeffs.size()));
            for (std::size_t i = 0; i < coeffs.size(); ++i)
                c[static_cast<Eigen::Index>(i)] = coeffs[i];
            conj.push_back({std::move(c), term.at("rhs").get<double>(),
                            relation_from_string(term.at("relation").get<std::string>())});
        }
        condition.dnf.push_back(std::move(conj));
    }
    return condition;
}

Json subrequirements_to_json(const std::vector<Box>& cells)
{
    Json j;
    j["schema_version"] = kSchemaVersion;
    Json list = Json::array();
    for (const Box& cell : cells) {
        Json entry;
        entry["id"] = cell.id().value_or(list.size());
        entry["bounds"] = bounds_to_json(cell);
        list.push_back(std::move(entry));
    }
    j["sub_requirements"] = std::move(list);
    return j;
}

std::vector<Box> subrequirements_from_json(const Json& j)
{
    require_schema_version(j, "sub-requirements file");
    std::vector<Box> cells;
    for (const auto& entry : j.at("sub_requirements")) {
        Box box = bounds_from_json(entry.at("bounds"));
        box.set_id(entry.at("id").get<std::size_t>());
        cells.push_back(std::move(box));
    }
    return cells;
}

std::string subrequirements_to_csv(const std::vector<Box>& cells)
{
    std::ostringstream out;
    out << "id";
    if (!cells.empty())
        for (std::size_t d = 0; d < cells.front().dimension(); ++d)
            out << ",dim" << d << "_lo,dim" << d << "_hi";
    out << '\n';
    for (const Box& cell : cells) {
        out << cell.id().value_or(0);
        for (const Interval& iv : cell.dims())
            out << ',' << csv_double(iv.lo) << ',' << csv_double(iv.hi);
        out << '\n';
    }
    return out.str();
}

Json detectors_to_json(const DetectorSet& ds)
{
    Json j;
    j["schema_version"] = kSchemaVersion;
    Json params;
    params["self_radius"] = ds.params.self_radius;
    params["num_detectors"] = ds.params.num_detectors;
    params["seed"] = ds.params.seed;
    params["max_attempts"] = ds.params.effective_max_attempts();
    j["params"] = std::move(params);
    Json ids = Json::array();
    for (const Box& d : ds.detectors)
        ids.push_back(d.id().value_or(0));
    j["detector_ids"] = std::move(ids);
    j["attempts_used"] = ds.attempts_used;
    return j;
}

DetectorSet detectors_from_json(const Json& j, const std::vector<Box>& pool)
{
    require_schema_version(j, "detectors file");
    DetectorSet ds;
    const Json& params = j.at("params");
    ds.params.self_radius = params.at("self_radius").get<double>();
    ds.params.num_detectors = params.at("num_detectors").get<std::size_t>();
    ds.params.seed = params.at("seed").get<std::uint64_t>();
    ds.params.max_attempts = params.value("max_attempts", std::size_t{0});
    ds.attempts_used = j.value("attempts_used", std::size_t{0});

    std::map<std::size_t, const Box*> by_id;
    for (const Box& cell : pool)
        if (cell.id())
            by_id[*cell.id()] = &cell;
    for (const auto& id_json : j.at("detector_ids")) {
        const auto id = id_json.get<std::size_t>();
        auto it = by_id.find(id);
        if (it == by_id.end())
            throw ConfigError("detector id " + std::to_string(id) +
                              " not present in the pool");
        ds.detectors.push_back(*it->second);
    }
    return ds;
}

Json ground_truth_to_json(const GroundTruth& gt)
{
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["networks"] = gt.networks;
    Json cells = Json::array();
    for (const Box& cell : gt.cells) {
        Json entry;
        entry["id"] = cell.id().value_or(cells.size());
        entry["bounds"] = bounds_to_json(cell);
        cells.push_back(std::move(entry));
    }
    j["cells"] = std::move(cells);

    Json entries = Json::object();
    for (const CellResult& result : gt.results) {
        Json e;
        e["label"] = to_string(result.label);
        Json verdicts = Json::array();
        for (std::size_t n = 0; n < result.verdicts.size(); ++n) {
            Json v = verdict_to_json(result.verdicts[n]);
            v["network"] = n < gt.networks.size() ? gt.networks[n] : std::string{};
            verdicts.push_back(std::move(v));
        }
        e["verdicts"] = std::move(verdicts);
        entries[std::to_string(result.id)] = std::move(e);
    }
    j["entries"] = std::move(entries);
    return j;
}

GroundTruth ground_truth_from_json(const Json& j)
{
    require_schema_version(j, "ground truth file");
    GroundTruth gt;
    gt.networks = j.at("networks").get<std::vector<std::string>>();
    for (const auto& entry : j.at("cells")) {
        Box box = bounds_from_json(entry.at("bounds"));
        box.set_id(entry.at("id").get<std::size_t>());
        gt.cells.push_back(std::move(box));
    }
    gt.results.resize(gt.cells.size());
    for (const auto& [key, e] : j.at("entries").items()) {
        CellResult result;
        result.id = static_cast<std::size_t>(std::stoull(key));
        result.label = cell_label_from_string(e.at("label").get<std::string>());
        if (e.contains("verdicts"))
            for (const auto& v : e.at("verdicts"))
                result.verdicts.push_back(verdict_from_json_entry(v));
        if (result.id >= gt.results.size())
            throw ConfigError("ground truth entry id " + key + " out of range");
        gt.results[result.id] = std::move(result);
    }
    return gt;
}

Json property_to_json(const PropertySpec& p)
{
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["bounds"] = bounds_to_json(p.box);
    j["condition"] = condition_to_json(p.condition);
    j["split_dims"] = p.partition.split_dims;
    j["n"] = p.partition.num_subintervals;
    if (p.partition.min_split_width != 1e-9)
        j["min_split_width"] = p.partition.min_split_width;
    return j;
}

PropertySpec property_from_json(const Json& j)
{
    require_schema_version(j, "property file");
    PropertySpec p;
    p.box = bounds_from_json(j.at("bounds"));
    p.condition = condition_from_json(j.at("condition"));
    p.partition.split_dims = j.at("split_dims").get<std::vector<std::size_t>>();
    p.partition.num_subintervals = j.at("n").get<std::size_t>();
    p.partition.min_split_width = j.value("min_split_width", 1e-9);
    return p;
}

Json config_to_json(const ExperimentConfig& cfg)
{
    Json j;
    j["schema_version"] = kSchemaVersion;
    Json nets = Json::array();
    for (const auto& p : cfg.network_paths)
        nets.push_back(p.string());
    j["networks"] = std::move(nets);
    j["property"] = property_to_json(cfg.property);
    j["detector_sizes"] = cfg.sweep.detector_sizes;
    j["radii"] = cfg.sweep.radii;
    j["repetitions"] = cfg.sweep.repetitions;
    j["master_seed"] = cfg.sweep.master_seed;
    if (cfg.sweep.max_attempts != 0)
        j["max_attempts"] = cfg.sweep.max_attempts;
    j["backend"] = backend_to_string(cfg.backend);
    if (cfg.adapter)
        j["adapter_exe"] = cfg.adapter->executable.string();
    j["workers"] = cfg.workers;
    j["timeout_s"] = cfg.timeout_s;
    j["falsify_samples"] = cfg.falsify_samples;
    j["output_dir"] = cfg.output_dir.string();
    return j;
}

ExperimentConfig config_from_json(const Json& j)
{
    require_schema_version(j, "experiment config");
    ExperimentConfig cfg;
    try {
        for (const auto& p : j.at("networks"))
            cfg.network_paths.emplace_back(p.get<std::string>());
        if (j.at("property").is_string())
            cfg.property = property_from_json(load_json(j.at("property").get<std::string>()));
        else
            cfg.property = property_from_json(j.at("property"));
        cfg.sweep.detector_sizes = j.value("detector_sizes", std::vector<std::size_t>{});
        cfg.sweep.radii = j.value("radii", std::vector<double>{});
        cfg.sweep.repetitions = j.value("repetitions", std::size_t{1});
        cfg.sweep.master_seed = j.value("master_seed", std::uint64_t{0});
        cfg.sweep.max_attempts = j.value("max_attempts", std::size_t{0});
        cfg.backend = backend_from_string(j.value("backend", std::string{"builtin"}));
        if (j.contains("adapter_exe"))
            cfg.adapter = ExternalAdapterConfig{j.at("adapter_exe").get<std::string>(), {}};
        cfg.workers = j.value("workers", std::size_t{1});
        cfg.timeout_s = j.value("timeout_s", 60.0);
        cfg.falsify_samples = j.value("falsify_samples", std::size_t{1000});
        cfg.output_dir = j.value("output_dir", std::string{});
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("experiment config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

Json report_to_json(const ExperimentReport& report, const ExperimentConfig& cfg)
{
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["config"] = config_to_json(cfg);

    Json summary;
    summary["cells"] = report.ground_truth.cells.size();
    summary["safe"] = report.ground_truth.count_label(CellLabel::Safe);
    summary["unsafe"] = report.ground_truth.count_label(CellLabel::Unsafe);
    summary["unknown"] = report.ground_truth.count_label(CellLabel::Unknown);
    j["ground_truth_summary"] = std::move(summary);

    Json runs = Json::array();
    for (const ExperimentRun& run : report.runs) {
        Json r;
        r["detector_size"] = run.detector_size;
        r["self_radius"] = run.self_radius;
        r["repetition"] = run.repetition;
        r["seed"] = run.seed;
        r["detector_ids"] = run.detector_ids;
        r["attempts_used"] = run.attempts_used;
        r["tp"] = run.counts.tp;
        r["fp"] = run.counts.fp;
        r["unknown"] = run.counts.unknown;
        if (auto p = run.counts.precision())
            r["precision"] = *p;
        else
            r["precision"] = nullptr;
        if (run.failed) {
            r["failed"] = true;
            r["failure_reason"] = run.failure_reason;
        }
        runs.push_back(std::move(r));
    }
    j["runs"] = std::move(runs);

    Json aggregates = Json::array();
    for (const ExperimentAggregate& agg : report.aggregates) {
        Json a;
        a["detector_size"] = agg.detector_size;
        a["self_radius"] = agg.self_radius;
        a["repetitions"] = agg.repetitions;
        a["mean_tp"] = agg.mean_tp;
        if (agg.mean_precision)
            a["mean_precision"] = *agg.mean_precision;
        else
            a["mean_precision"] = nullptr;
        aggregates.push_back(std::move(a));
    }
    j["aggregates"] = std::move(aggregates);

    // Wall-clock data lives only under this key so deterministic comparison
    // can drop it wholesale.
    Json timing;
    timing["label_time_s"] = report.label_time_s;
    timing["nsa_time_s"] = report.nsa_time_s;
    j["timing"] = std::move(timing);
    return j;
}

std::string report_to_csv(const ExperimentReport& report)
{
    std::ostringstream out;
    out << "detector_size,self_radius,repetition,seed,tp,fp,unknown,precision,"
           "attempts_used,detector_ids\n";
    for (const ExperimentRun& run : report.runs) {
        out << run.detector_size << ',' << csv_double(run.self_radius) << ','
            << run.repetition << ',' << run.seed << ',' << run.counts.tp << ','
            << run.counts.fp << ',' << run.counts.unknown << ',';
        if (auto p = run.counts.precision())
            out << csv_double(*p);
        out << ',' << run.attempts_used << ',';
        for (std::size_t i = 0; i < run.detector_ids.size(); ++i) {
            if (i > 0)
                out << ';';
            out << run.detector_ids[i];
        }
        out << '\n';
    }
    return out.str();
}

Json adapter_query_to_json(const std::string& nnet_path, const Box& box,
                           const OutputCondition& condition, double timeout_s)
{
    Json j;
    j["nnet_path"] = nnet_path;
    j["box"] = bounds_to_json(box);
    j["condition"] = condition_to_json(condition);
    j["timeout_s"] = timeout_s;
    return j;
}

AdapterQuery adapter_query_from_json(const Json& j)
{
    AdapterQuery q;
    try {
        q.nnet_path = j.at("nnet_path").get<std::string>();
        q.box = bounds_from_json(j.at("box"));
        q.condition = condition_from_json(j.at("condition"));
        q.timeout_s = j.value("timeout_s", 60.0);
    } catch (const Json::exception& e) {
        throw ProtocolError(std::string("malformed adapter query: ") + e.what());
    }
    return q;
}

Json verdict_file_to_json(const Verdict& v)
{
    Json j;
    j["status"] = to_string(v.status);
    if (v.witness) {
        std::vector<double> w(v.witness->data(), v.witness->data() + v.witness->size());
        j["witness"] = w;
    }
    return j;
}

Verdict verdict_file_from_json(const Json& j)
{
    if (!j.is_object() || !j.contains("status") || !j.at("status").is_string())
        throw ProtocolError("verdict file: missing or non-string status");
    const std::string status = j.at("status").get<std::string>();
    Verdict v;
    if (status == "sat")
        v.status = Status::Sat;
    else if (status == "unsat")
        v.status = Status::Unsat;
    else if (status == "unknown")
        v.status = Status::Unknown;
    else
        throw ProtocolError("verdict file: unknown status '" + status + "'");

    if (j.contains("witness")) {
        if (!j.at("witness").is_array())
            throw ProtocolError("verdict file: witness must be an array of numbers");
        std::vector<double> w;
        for (const auto& x : j.at("witness")) {
            if (!x.is_number())
                throw ProtocolError("verdict file: witness must be an array of numbers");
            w.push_back(x.get<double>());
        }
        Eigen::VectorXd vec(static_cast<Eigen::Index>(w.size()));
        for (std::size_t i = 0; i < w.size(); ++i)
            vec[static_cast<Eigen::Index>(i)] = w[i];
        v.witness = std::move(vec);
    }
    if (v.status == Status::Sat && !v.witness)
        throw ProtocolError("verdict file: sat verdict without witness");
    return v;
}

Json load_json(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in)
        throw Error("cannot open " + file.string());
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw Error(file.string() + ": " + e.what());
    }
}

void save_json(const Json& j, const std::filesystem::path& file)
{
    std::ofstream out(file);
    if (!out)
        throw Error("cannot write " + file.string());
    out << j.dump(2) << '\n';
}

void save_text(const std::string& text, const std::filesystem::path& file)
{
    std::ofstream out(file);
    if (!out)
        throw Error("cannot write " + file.string());
    out << text;
}

} // namespace nsv
