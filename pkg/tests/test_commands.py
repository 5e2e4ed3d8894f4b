import pytest

from icardmaps.services import commands, file_ops
from icardmaps.services.bouquet import bouquet_to_json
from icardmaps.services.errors import BudgetExceededError, InputError, ParseError
from icardmaps.services.synthetic_data import sample_bouquets


class TestOrdinalCommands:
    def test_eval_normalizes(self):
        data = commands.ord_eval("e[1](2)")
        assert data["value"] == "w^(2)"
        assert data["predicates"]["is_limit"]
        assert data["predicates"]["predecessor"] is None

    def test_eval_successor_reports_predecessor(self):
        preds = commands.ord_eval("w+1")["predicates"]
        assert preds["is_successor"]
        assert preds["predecessor"] == "w"

    def test_cmp_add_sub(self):
        assert commands.ord_cmp("w", "w^(2)")["result"] == "<"
        assert commands.ord_cmp("w+1", "w+1")["result"] == "="
        assert commands.ord_add("1", "w") == {"value": "w"}
        assert commands.ord_sub("w", "w+3") == {"value": "3"}

    def test_hyper_log_exp(self):
        assert commands.ord_exp("1", "2") == {"value": "w^(2)"}
        assert commands.ord_log("1", "w^(2)") == {"value": "2"}

    def test_fundseq(self):
        data = commands.ord_fundseq("w", 3)
        assert data["sequence"] == ["0", "1", "2"]
        assert data["value"] == "w"

    def test_parse_errors_propagate(self):
        with pytest.raises(ParseError):
            commands.ord_eval("w^")


class TestTopologyCommands:
    def test_simple_fn_text(self):
        fn = commands.parse_simple_fn_text("0:3, w:1")
        assert len(fn) == 2
        assert len(commands.parse_simple_fn_text("")) == 0

    def test_simple_fn_text_bad_entry(self):
        with pytest.raises(InputError):
            commands.parse_simple_fn_text("x")

    def test_member(self):
        data = commands.topology_member("e[w](1)", "(0, 1]_w")
        assert data == {"interval": "(0, 1]_w", "member": True, "ok": True}
        assert not commands.topology_member("w+1", "(0, 7]_1")["ok"]

    def test_shrink(self):
        data = commands.topology_shrink("1", "1", commands.parse_simple_fn_text("0:3"))
        assert data["interval"] == "(3, w]_0"

    def test_rank(self):
        assert commands.topology_rank("1", "w^(2)") == {"rank": "2"}


class TestGlCommands:
    def test_prove_theorem(self):
        data = commands.gl_prove("[]([]p0 -> p0) -> []p0")
        assert data["verdict"] == "theorem"
        assert data["ok"]
        assert "countermodel" not in data

    def test_prove_non_theorem_has_countermodel(self):
        data = commands.gl_prove("[]p0 -> p0")
        assert data["verdict"] == "non-theorem"
        assert not data["ok"]
        model = data["countermodel"]
        assert commands.gl_check(model, None, "[]p0 -> p0") == {"node": model["root"], "holds": False, "ok": False}

    def test_budget(self):
        with pytest.raises(BudgetExceededError):
            commands.gl_prove("[]([]p0 -> p0) -> []p0", budget=2)

    def test_model_and_consistency(self):
        data = commands.gl_model(["<>p0", "[]~p1"])
        assert data["consistent"] and data["rank"] >= 1
        assert commands.gl_consistent(["p0", "~p0"]) == {"consistent": False, "ok": False}

    def test_characteristic(self):
        data = commands.gl_characteristic(["[][]F"], 8)
        assert data["characteristic"] == "1"
        assert not data["saturated"]


class TestBouquetCommands:
    def test_resolve_by_sample_and_json(self):
        spread = commands.resolve_bouquet(sample="spread")
        assert commands.bouquet_rank(spread) == {"node_id": "spread", "rank": "3"}
        same = commands.resolve_bouquet(bouquet_to_json(spread))
        assert same.rank == spread.rank

    @pytest.mark.parametrize("kwargs", [{}, {"sample": "nope"}])
    def test_resolve_errors(self, kwargs):
        with pytest.raises(InputError):
            commands.resolve_bouquet(**kwargs)

    def test_mc(self):
        data = commands.bouquet_mc(commands.resolve_bouquet(sample="chains"), "", "<>p0", 6)
        assert data["verdict"] == "FalseUpTo(6)"
        assert not data["exact"]

    def test_daughters(self):
        data = commands.bouquet_daughters(sample_bouquets()["chains"], "each_once", 3, dominating=True)
        assert data["mode"] == "each_once"
        assert [row["rank"] for row in data["daughters"]] == ["0", "1", "2"]
        assert "dominating" in data

    def test_daughters_bad_mode(self):
        with pytest.raises(InputError):
            commands.bouquet_daughters(sample_bouquets()["two"], "sideways", 3)

    def test_materialize(self):
        data = commands.bouquet_materialize(sample_bouquets()["spread"], 1, 2)
        assert [row["path"] for row in data["nodes"]] == ["", "0.0", "1.0", "1.1"]


class TestDMapCommands:
    def test_eval_top_maps_to_root(self):
        two = sample_bouquets()["two"]
        top = commands.dmap_witness("1", two, "")["top"]
        data = commands.dmap_eval("1", two, top, trace=True)
        assert data["path"] == ""
        assert data["node_id"] == "two"
        assert data["trace"]

    def test_witness_evaluates_back(self):
        spread = sample_bouquets()["spread"]
        data = commands.dmap_witness("w", spread, "1.1")
        assert commands.dmap_eval("w", spread, data["witness"])["path"] == "1.1"

    def test_blocks(self):
        data = commands.dmap_blocks("1", sample_bouquets()["two"], 4)
        assert len(data["blocks"]) == 4

    def test_selftest_save(self, data_dir):
        data = commands.dmap_selftest(["1"], {"two": sample_bouquets()["two"]}, samples=4, save=True)
        assert data["ok"], data["failures"]
        assert (data_dir / file_ops.REPORTS_DIR / data["report_file"]).exists()
        assert (data_dir / file_ops.REPORTS_DIR / data["table_file"]).exists()


class TestReports:
    def test_list_and_show(self):
        file_ops.write_json("reports/selftest_a.json", {"ok": True})
        listing = commands.list_reports()
        assert [row["filename"] for row in listing["reports"]] == ["selftest_a.json"]
        assert commands.show_report("selftest_a.json") == {"ok": True}

    @pytest.mark.parametrize("name", ["../x.json", "a/b.json", ".hidden", "missing.json"])
    def test_show_rejects(self, name):
        with pytest.raises(InputError):
            commands.show_report(name)

    def test_empty_listing(self):
        assert commands.list_reports() == {"reports": []}
