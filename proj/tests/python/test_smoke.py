import math

import pytest

import varietyir as vi


def test_analyze_and_transduce():
    assert vi.analyze("Hello, World!") == ["hello", "world"]
    rs = vi.VarietyRuleSet("t", "f", [vi.RewriteRule("ab", "x"), vi.RewriteRule("b", "y")])
    assert vi.transduce("abb", rs) == "xy"
    lex = vi.parse_ruleset('ruleset v family f\nrule "s" -> "ç"\nlex chat -> gat\n')
    assert vi.transduce("chat sec", lex) == "gat çec"


def test_errors_surface_as_python_exceptions():
    with pytest.raises(vi.VarietyIRError, match="EmptyLhs"):
        vi.parse_ruleset('ruleset v family f\nrule "" -> "x"\n')


def test_bm25():
    idx = vi.build_index([("d1", "apple"), ("d2", "banana")])
    hits = vi.bm25_search("apple", idx, k=10)
    assert hits[0][0] == "d1"
    assert hits[0][1] == pytest.approx(math.log(2.0), abs=1e-12)
    assert idx.avgdl == 1.0


def test_encoder_and_scores():
    assert len(vi.hash_subwords("cat")) == 6
    p = vi.init_encoder(dim=8, buckets=256, seed=1)
    q = vi.encode("river stone", p)
    assert vi.score_single(q, q) == pytest.approx(1.0)
    assert vi.score_maxsim(q, q) == pytest.approx(2.0)
    docs = [("d1", "river stone"), ("d2", "lake")]
    assert vi.dense_search("river stone", p, docs)[0][0] == "d1"


def test_metrics():
    run = {"q": [("x", 3.0), ("r1", 2.0), ("r2", 1.0)]}
    qrels = {"q": {"r1": 1, "r2": 1}}
    assert vi.mrr_at_k(run, qrels, 10)["mean"] == pytest.approx(0.5)
    assert vi.recall_at_k(run, qrels, 2)["mean"] == pytest.approx(0.5)
    assert vi.sign_test_p_value(10, 0) == pytest.approx(0.001953125)
    assert vi.infonce_from_scores(0.1, [0.1, 0.1, 0.1], 0.05) == pytest.approx(math.log(4.0))


def test_tiny_experiment(tmp_path):
    cfg = vi.ExperimentConfig.parse(
        "doc_count = 120\nvocab_size = 300\ntrain_queries = 20\neval_queries = 10\n"
        "varieties_per_family = 2\nrules_per_family = 6\ndim = 8\nbuckets = 1024\n"
        "epochs = 1\nseeds = 1\nretrieval_depth = 50\nrerank_depth = 10\nrun_file_depth = 10\n"
    )
    exp = vi.Experiment(cfg)
    report = exp.run_all(tmp_path)
    assert report.exists()
    assert (tmp_path / "plot_rq1.csv").read_text().startswith(
        "ranker,pair,query_language,condition,metric,value,seed\n"
    )
