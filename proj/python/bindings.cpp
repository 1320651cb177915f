#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "varietyir/analyzer.hpp"
#include "varietyir/error.hpp"
#include "varietyir/evaluator.hpp"
#include "varietyir/experiment.hpp"
#include "varietyir/lexical_index.hpp"
#include "varietyir/neural_ranker.hpp"
#include "varietyir/trainer.hpp"
#include "varietyir/transducer.hpp"

namespace py = pybind11;
using namespace varietyir;

namespace {

using PyRanking = std::vector<std::pair<std::string, double>>;

PyRanking to_py(const Ranking& r) {
    PyRanking out;
    out.reserve(r.size());
    for (const auto& e : r) out.emplace_back(e.doc_id, e.score);
    return out;
}

Run to_run(const std::map<std::string, PyRanking>& in) {
    Run run;
    for (const auto& [q, entries] : in) {
        auto& r = run[q];
        for (const auto& [d, s] : entries) r.push_back({d, s});
    }
    return run;
}

DocumentCollection to_collection(const std::vector<std::pair<std::string, std::string>>& docs) {
    std::vector<Document> out;
    out.reserve(docs.size());
    for (const auto& [id, text] : docs) out.push_back({id, text, ""});
    return DocumentCollection(std::move(out));
}

py::dict metric_dict(const MetricResult& r) {
    py::dict d;
    d["per_query"] = r.per_query;
    d["mean"] = r.mean;
    d["excluded_queries"] = r.excluded_queries;
    return d;
}

py::list rows_of(const ResultTable& t) {
    py::list rows;
    for (const auto& r : t.rows) {
        py::dict d;
        d["ranker"] = r.ranker;
        d["pair"] = r.pair;
        d["query_language"] = r.query_language;
        d["condition"] = r.condition;
        d["metric"] = r.metric;
        d["value"] = r.value;
        d["seed"] = r.seed;
        rows.append(d);
    }
    return rows;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Robust retrieval across language varieties (C++ core).";
    m.attr("__version__") = "0.1.0";

    py::register_exception<Error>(m, "VarietyIRError", PyExc_RuntimeError);

    m.def("analyze", [](const std::string& text) { return analyze(text); }, py::arg("text"));

    py::enum_<RuleScope>(m, "RuleScope")
        .value("ANYWHERE", RuleScope::Anywhere)
        .value("WORD_INITIAL", RuleScope::WordInitial)
        .value("WORD_FINAL", RuleScope::WordFinal)
        .value("WHOLE_WORD", RuleScope::WholeWord);

    py::class_<RewriteRule>(m, "RewriteRule")
        .def(py::init([](std::string lhs, std::string rhs, RuleScope scope) {
                 RewriteRule r{std::move(lhs), std::move(rhs), scope};
                 validate_rule(r);
                 return r;
             }),
             py::arg("lhs"), py::arg("rhs"), py::arg("scope") = RuleScope::Anywhere)
        .def_readonly("lhs", &RewriteRule::lhs)
        .def_readonly("rhs", &RewriteRule::rhs)
        .def_readonly("scope", &RewriteRule::scope)
        .def(py::self == py::self)
        .def("__repr__", [](const RewriteRule& r) { return "RewriteRule('" + r.lhs + "' -> '" + r.rhs + "')"; });

    py::class_<VarietyRuleSet>(m, "VarietyRuleSet")
        .def(py::init([](std::string id, std::string family, std::vector<RewriteRule> rules,
                         std::map<std::string, std::string> lexicon) {
                 return VarietyRuleSet{std::move(id), std::move(family), std::move(rules), std::move(lexicon)};
             }),
             py::arg("ruleset_id"), py::arg("family_id"), py::arg("rules") = std::vector<RewriteRule>{},
             py::arg("lexicon") = std::map<std::string, std::string>{})
        .def_readonly("ruleset_id", &VarietyRuleSet::ruleset_id)
        .def_readonly("family_id", &VarietyRuleSet::family_id)
        .def_readonly("rules", &VarietyRuleSet::rules)
        .def_readonly("lexicon", &VarietyRuleSet::lexicon)
        .def("format", &format_ruleset);

    m.def("parse_ruleset", &parse_ruleset, py::arg("text"));
    m.def("transduce", &transduce, py::arg("text"), py::arg("ruleset"));

    py::class_<BM25Params>(m, "BM25Params")
        .def(py::init([](double k1, double b) {
                 BM25Params p{k1, b};
                 p.validate();
                 return p;
             }),
             py::arg("k1") = 0.9, py::arg("b") = 0.4)
        .def_readonly("k1", &BM25Params::k1)
        .def_readonly("b", &BM25Params::b);

    py::class_<InvertedIndex>(m, "InvertedIndex")
        .def_property_readonly("doc_count", &InvertedIndex::doc_count)
        .def_property_readonly("avgdl", &InvertedIndex::avgdl)
        .def("document_frequency", &InvertedIndex::document_frequency)
        .def("snapshot", &format_index_snapshot);

    m.def("build_index", [](const std::vector<std::pair<std::string, std::string>>& docs) {
        return build_index(to_collection(docs));
    }, py::arg("docs"));
    m.def("bm25_search", [](const std::string& q, const InvertedIndex& idx, std::size_t k, const BM25Params& p) {
        return to_py(bm25_search(q, idx, p, k));
    }, py::arg("query"), py::arg("index"), py::arg("k") = 1000, py::arg("params") = BM25Params{});

    m.def("hash_subwords", [](const std::string& token) { return hash_subwords(token, SubwordHasherConfig{}); },
          py::arg("token"));

    py::class_<EncoderParams>(m, "EncoderParams")
        .def_readonly("dim", &EncoderParams::dim)
        .def_readonly("version", &EncoderParams::version)
        .def_property_readonly("parameter_count", &EncoderParams::parameter_count)
        .def("save", [](const EncoderParams& p, const std::filesystem::path& path) { save_params(p, path); });
    m.def("load_params", &load_params, py::arg("path"));
    m.def("init_encoder", [](std::size_t dim, std::uint32_t buckets, std::uint64_t seed, double init_scale) {
        EncoderConfig cfg;
        cfg.dim = dim;
        cfg.hasher.bucket_count = buckets;
        cfg.init_scale = init_scale;
        return init_encoder(cfg, seed);
    }, py::arg("dim") = 64, py::arg("buckets") = 32768, py::arg("seed") = 0, py::arg("init_scale") = 0.1);

    py::class_<EncodedText>(m, "EncodedText")
        .def_readonly("dim", &EncodedText::dim)
        .def_property_readonly("token_count", &EncodedText::token_count)
        .def_readonly("pooled", &EncodedText::pooled);
    m.def("encode", [](const std::string& text, const EncoderParams& p) { return encode(text, p); },
          py::arg("text"), py::arg("params"));
    m.def("score_single", &score_single);
    m.def("score_maxsim", &score_maxsim);
    m.def("dense_search", [](const std::string& q, const EncoderParams& p,
                             const std::vector<std::pair<std::string, std::string>>& docs, const std::string& mode,
                             std::size_t k) {
        const auto store = DenseStore::build(to_collection(docs), p);
        return to_py(search_dense(q, p, store, parse_scoring_mode(mode), k).ranking);
    }, py::arg("query"), py::arg("params"), py::arg("docs"), py::arg("mode") = "single_vector", py::arg("k") = 1000);

    m.def("infonce_from_scores", [](double pos, const std::vector<double>& neg, double tau) {
        return infonce_from_scores(pos, neg, tau);
    }, py::arg("positive"), py::arg("negatives"), py::arg("temperature"));

    m.def("mrr_at_k", [](const std::map<std::string, PyRanking>& run, const Qrels& q, std::size_t k, int t) {
        return metric_dict(mrr_at_k(to_run(run), q, k, t));
    }, py::arg("run"), py::arg("qrels"), py::arg("k") = 10, py::arg("threshold") = 1);
    m.def("recall_at_k", [](const std::map<std::string, PyRanking>& run, const Qrels& q, std::size_t k, int t) {
        return metric_dict(recall_at_k(to_run(run), q, k, t));
    }, py::arg("run"), py::arg("qrels"), py::arg("k") = 1000, py::arg("threshold") = 1);
    m.def("ndcg_at_k", [](const std::map<std::string, PyRanking>& run, const Qrels& q, std::size_t k) {
        return metric_dict(ndcg_at_k(to_run(run), q, k));
    }, py::arg("run"), py::arg("qrels"), py::arg("k") = 20);
    m.def("sign_test_p_value", py::overload_cast<std::size_t, std::size_t>(&sign_test_p_value),
          py::arg("positives"), py::arg("negatives"));

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def_static("parse", &parse_experiment_config, py::arg("text"))
        .def("set", &apply_config_setting, py::arg("key"), py::arg("value"))
        .def("canonical", &ExperimentConfig::canonical)
        .def("hash", &ExperimentConfig::hash);

    py::class_<Experiment>(m, "Experiment")
        .def(py::init<ExperimentConfig>(), py::arg("config"))
        .def("pair_ids", &Experiment::pair_ids)
        .def("default_train_pair", &Experiment::default_train_pair)
        .def("same_family_pairs", &Experiment::same_family_pairs)
        .def("cross_family_pairs", &Experiment::cross_family_pairs)
        .def("run_rq1", [](Experiment& e) { return rows_of(e.run_rq1()); })
        .def("run_rq2", [](Experiment& e, const std::string& a) { return rows_of(e.run_rq2(a)); })
        .def("run_rq3", [](Experiment& e, const std::string& a, const std::vector<std::string>& p) {
            return rows_of(e.run_rq3(a, p));
        })
        .def("run_rq4", [](Experiment& e, const std::string& a, const std::vector<std::string>& p) {
            return rows_of(e.run_rq4(a, p));
        })
        .def("run_all", [](Experiment& e, const std::filesystem::path& out) {
            const auto a = e.default_train_pair();
            std::vector<ResultTable> tables{e.run_rq1(), e.run_rq2(a), e.run_rq3(a, e.same_family_pairs(a)),
                                            e.run_rq4(a, e.cross_family_pairs(a))};
            e.write_outputs(tables, out);
            return out / "REPORT.md";
        }, py::arg("out"));
}
