"""Command-line interface: file parsing, report shapes, exit codes, the
streaming detector, and the equivalences the reports must satisfy."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

import blockdp as bd
from blockdp import cli

from conftest import rescore


def run_cli(capsys, argv):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_events(path, times):
    with open(path, "w") as fh:
        for t in times:
            fh.write(f"{float(t)!r}\n")
    return str(path)


def write_bins(path, edges, counts):
    with open(path, "w") as fh:
        for i, c in enumerate(counts):
            fh.write(f"{float(edges[i])!r},{float(edges[i + 1])!r},{int(c)}\n")
    return str(path)


def write_measures(path, times, values, sigmas):
    with open(path, "w") as fh:
        for t, x, s in zip(times, values, sigmas):
            fh.write(f"{float(t)!r},{float(x)!r},{float(s)!r}\n")
    return str(path)


def two_block_times():
    rng = np.random.default_rng(20260822)
    n_lo = rng.poisson(100)
    n_hi = rng.poisson(100)
    return np.concatenate([
        np.sort(rng.uniform(0, 100, n_lo)),
        np.sort(rng.uniform(100, 110, n_hi)),
    ])


def step_times():
    rng = np.random.default_rng(20260822)
    return np.concatenate([
        np.sort(rng.uniform(0, 50, 50)),
        np.sort(rng.uniform(50, 55, 50)),
    ])


# ---------------------------------------------------------------------------
# segment


def test_segment_recovers_planted_rate_change(tmp_path, capsys):
    times = two_block_times()
    assert times.size == 210
    path = write_events(tmp_path / "two.csv", times)
    code, out, err = run_cli(capsys, ["segment", path])
    assert code == 0
    doc = json.loads(out)
    assert doc["n_cells"] == 210
    assert doc["n_blocks"] == 2
    assert doc["changepoints"][0] == 1
    # the recovered boundary sits within 2 time units of the planted one
    boundary = doc["block_edges"][1]
    assert abs(boundary - 100.0) <= 2.0
    assert boundary == pytest.approx(100.2749978448717, rel=1e-12)
    assert doc["n_fitness_evals"] == 210 * 211 // 2
    # block rows carry the per-block rate estimates
    lo_rate = doc["blocks"][0]["estimate"]
    hi_rate = doc["blocks"][1]["estimate"]
    assert 0.5 < lo_rate < 2.0 < 5.0 < hi_rate < 20.0


def test_segment_report_rescore_matches_library(tmp_path, capsys):
    times = two_block_times()
    path = write_events(tmp_path / "two.csv", times)
    code, out, _ = run_cli(capsys, ["segment", path, "--penalty", "3.0"])
    assert code == 0
    doc = json.loads(out)
    cells = bd.cells_from_events(times)
    model = bd.poisson_events_model()
    total = rescore(cells, model, 3.0, np.asarray(doc["changepoints"]))
    assert doc["total_fitness"] == pytest.approx(total, rel=1e-12, abs=1e-12)
    assert doc["penalty_per_block"] == 3.0


def test_segment_coarse_rebin_brackets_the_change(tmp_path, capsys):
    # The same data squashed into 14 equal bins: the optimizer still puts
    # block boundaries around the planted change at t = 100, within one
    # bin width (110/14 = 7.857).
    times = two_block_times()
    edges = np.linspace(0, 110, 15)
    counts, _ = np.histogram(times, bins=edges)
    path = write_bins(tmp_path / "coarse.csv", edges, counts)
    code, out, _ = run_cli(capsys, ["segment", path, "--model", "bins"])
    assert code == 0
    doc = json.loads(out)
    assert doc["n_blocks"] == 3
    interior = doc["block_edges"][1:-1]
    assert interior == pytest.approx([94.28571428571428, 102.14285714285714],
                                     rel=1e-12)
    assert interior[0] <= 100.0 <= interior[1]


def test_segment_measures_constant_level(tmp_path, capsys):
    rng = np.random.default_rng(7)
    t = np.arange(1.0, 31.0)
    x = 2.0 + 0.01 * rng.standard_normal(30)
    path = write_measures(tmp_path / "m.csv", t, x, np.full(30, 0.5))
    code, out, _ = run_cli(capsys, ["segment", path, "--model", "measures"])
    assert code == 0
    doc = json.loads(out)
    assert doc["n_blocks"] == 1
    assert doc["blocks"][0]["estimate"] == pytest.approx(2.0, abs=0.05)


def test_segment_fixed_block_count(tmp_path, capsys):
    path = write_events(tmp_path / "t.csv", two_block_times())
    code, out, _ = run_cli(capsys, ["segment", path, "--k", "3"])
    assert code == 0
    doc = json.loads(out)
    assert doc["n_blocks"] == 3
    assert doc["penalty_per_block"] == 0.0


def test_segment_min_size_is_respected(tmp_path, capsys):
    path = write_events(tmp_path / "t.csv", two_block_times())
    code, out, _ = run_cli(capsys, ["segment", path, "--min-size", "60"])
    assert code == 0
    doc = json.loads(out)
    cps = doc["changepoints"]
    sizes = np.diff(cps + [doc["n_cells"] + 1])
    assert np.all(sizes >= 60)


def test_segment_comments_and_blanks_are_invisible(tmp_path, capsys):
    times = two_block_times()[:40]
    plain = write_events(tmp_path / "plain.csv", times)
    noisy = tmp_path / "noisy.csv"
    with open(plain) as fh:
        rows = fh.readlines()
    with open(noisy, "w") as fh:
        fh.write("# event times\n\n")
        for i, row in enumerate(rows):
            fh.write(row)
            if i % 7 == 0:
                fh.write(f"  # row {i}\n\n")
    code_a, out_a, _ = run_cli(capsys, ["segment", plain])
    code_b, out_b, _ = run_cli(capsys, ["segment", str(noisy)])
    assert code_a == code_b == 0
    assert out_a == out_b


def test_segment_csv_format(tmp_path, capsys):
    path = write_events(tmp_path / "t.csv", two_block_times())
    code, out, _ = run_cli(capsys, ["segment", path, "--format", "csv"])
    assert code == 0
    lines = out.strip().splitlines()
    meta = [l for l in lines if l.startswith("# ")]
    body = [l for l in lines if not l.startswith("# ")]
    assert any(l.startswith("# n_blocks=2") for l in meta)
    assert body[0].startswith("block,start_cell,end_cell,t_lo,t_hi")
    assert len(body) == 1 + 2  # header + one row per block


def test_segment_reads_stdin(tmp_path, capsys, monkeypatch):
    import io
    times = two_block_times()[:30]
    text = "".join(f"{float(t)!r}\n" for t in times)
    monkeypatch.setattr("sys.stdin", io.StringIO(text))
    code, out, _ = run_cli(capsys, ["segment"])
    assert code == 0
    assert json.loads(out)["n_cells"] == 30


# ---------------------------------------------------------------------------
# segment error paths


def test_segment_malformed_row_names_the_line(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("1.0\n2.0\nnot-a-number\n4.0\n")
    code, out, err = run_cli(capsys, ["segment", str(path)])
    assert code == 1
    assert out == ""
    assert f"{path}:3:" in err


def test_segment_noncontiguous_bins_are_rejected(tmp_path, capsys):
    path = tmp_path / "gap.csv"
    path.write_text("0.0,1.0,4\n2.0,3.0,5\n")
    code, _, err = run_cli(capsys, ["segment", str(path), "--model", "bins"])
    assert code == 1
    assert "previous one ended" in err


def test_segment_k_and_min_size_conflict(tmp_path, capsys):
    path = write_events(tmp_path / "t.csv", [1.0, 2.0, 3.0])
    code, _, err = run_cli(capsys, ["segment", path, "--k", "2", "--min-size", "2"])
    assert code == 1
    assert "mutually exclusive" in err


def test_segment_t0_requires_gap_cells(tmp_path, capsys):
    path = write_events(tmp_path / "t.csv", [1.0, 2.0, 3.0])
    code, _, err = run_cli(capsys, ["segment", path, "--t0", "0.0"])
    assert code == 1
    assert "--cells gap" in err


def test_segment_single_event_needs_a_wider_interval(tmp_path, capsys):
    # One event and no way to infer an interval: the inferred span is
    # empty, which the cell builder rejects; anchored gap cells work.
    path = write_events(tmp_path / "one.csv", [5.0])
    code, _, err = run_cli(capsys, ["segment", path])
    assert code == 1
    assert "width would be 0" in err
    code, out, _ = run_cli(
        capsys, ["segment", path, "--cells", "gap", "--t0", "0.0"]
    )
    assert code == 0
    assert json.loads(out)["n_blocks"] == 1


def test_unknown_flag_exits_one(capsys):
    code, _, err = run_cli(capsys, ["segment", "--frobnicate"])
    assert code == 1
    assert err != ""


def test_missing_input_file_exits_one(capsys):
    code, _, err = run_cli(capsys, ["segment", "/nonexistent/path.csv"])
    assert code == 1
    assert "cannot open" in err


# ---------------------------------------------------------------------------
# hist


def test_hist_two_level_bins_fixture(tmp_path, capsys):
    edges = np.linspace(0, 10, 11)
    counts = [3, 2, 4, 3, 2, 20, 22, 19, 21, 20]
    path = write_bins(tmp_path / "b.csv", edges, counts)
    code, out, _ = run_cli(capsys, ["hist", path, "--model", "bins"])
    assert code == 0
    doc = json.loads(out)
    assert doc["n_bins"] == 2
    assert doc["edges"] == [0.0, 5.0, 10.0]
    assert doc["bin_event_counts"] == [14, 102]
    assert doc["densities"][0] == pytest.approx(14 / 5, rel=1e-12)
    assert doc["densities"][1] == pytest.approx(102 / 5, rel=1e-12)
    assert doc["normalization"]["total_events"] == 116
    assert doc["normalization"]["sum_density_times_width"] == 116.0


def test_hist_uniform_events_is_one_bin(tmp_path, capsys):
    rng = np.random.default_rng(5)
    t = np.sort(rng.uniform(0, 50, 50))
    path = write_events(tmp_path / "u.csv", t)
    code, out, _ = run_cli(capsys, ["hist", path])
    assert code == 0
    assert json.loads(out)["n_bins"] == 1
    # the same data pre-binned into 10 equal bins also yields one bin
    e10 = np.linspace(0, 50, 11)
    c10, _ = np.histogram(t, bins=e10)
    path10 = write_bins(tmp_path / "u10.csv", e10, c10)
    code, out, _ = run_cli(capsys, ["hist", path10, "--model", "bins"])
    assert code == 0
    assert json.loads(out)["n_bins"] == 1


def test_hist_two_level_events_puts_edge_near_change(tmp_path, capsys):
    path = write_events(tmp_path / "two.csv", two_block_times())
    code, out, _ = run_cli(capsys, ["hist", path])
    assert code == 0
    doc = json.loads(out)
    assert doc["n_bins"] == 2
    assert abs(doc["edges"][1] - 100.0) <= 2.0


def test_hist_normalization_identity_random(tmp_path, capsys):
    rng = np.random.default_rng(99)
    for trial in range(5):
        t = np.sort(rng.uniform(0, 30, int(rng.integers(20, 120))))
        path = write_events(tmp_path / f"r{trial}.csv", t)
        code, out, _ = run_cli(capsys, ["hist", path])
        assert code == 0
        doc = json.loads(out)
        norm = doc["normalization"]
        assert norm["sum_density_times_width"] == pytest.approx(
            norm["total_events"], rel=1e-9
        )


def test_hist_csv_format(tmp_path, capsys):
    edges = np.linspace(0, 10, 11)
    counts = [3, 2, 4, 3, 2, 20, 22, 19, 21, 20]
    path = write_bins(tmp_path / "b.csv", edges, counts)
    code, out, _ = run_cli(capsys, ["hist", path, "--model", "bins",
                                    "--format", "csv"])
    assert code == 0
    lines = out.strip().splitlines()
    assert any(l.startswith("# n_bins=2") for l in lines)
    body = [l for l in lines if not l.startswith("# ")]
    assert body[0] == "bin,t_lo,t_hi,n_events,density"
    assert len(body) == 3


# ---------------------------------------------------------------------------
# stream


def test_stream_constant_rate_emits_once(tmp_path, capsys):
    rng = np.random.default_rng(20260822)
    times = np.sort(rng.uniform(0, 100, 100))
    path = write_events(tmp_path / "s.csv", times)
    code, out, err = run_cli(
        capsys, ["stream", path, "--t0", "0.0",
                 "--penalty", repr(float(np.log(100)))]
    )
    assert code == 0
    lines = [json.loads(l) for l in out.strip().splitlines()]
    assert len(lines) == 2  # one emission + summary
    assert lines[0] == {"n_processed": 1, "latest_block_start": 1,
                        "opt_value": lines[0]["opt_value"]}
    summary = lines[-1]
    assert summary["summary"] is True
    assert summary["n_records"] == 100
    assert summary["n_cells"] == 100
    assert summary["n_dropped"] == 0
    assert summary["n_emissions"] == 1
    assert summary["changepoints"] == [1]


def test_stream_step_change_emission_trace(tmp_path, capsys):
    # After the rate jump at t = 50 (cell 51 onward), the detector first
    # reacts three cells later, wobbles once, then locks onto block
    # start 50 for good.
    path = write_events(tmp_path / "s.csv", step_times())
    code, out, _ = run_cli(
        capsys, ["stream", path, "--t0", "0.0",
                 "--penalty", repr(float(np.log(100)))]
    )
    assert code == 0
    lines = [json.loads(l) for l in out.strip().splitlines()]
    emissions = [(l["n_processed"], l["latest_block_start"])
                 for l in lines if "summary" not in l]
    assert emissions == [(1, 1), (53, 50), (54, 53), (55, 50)]
    summary = lines[-1]
    assert summary["n_emissions"] == 4
    assert summary["changepoints"] == [1, 50]
    assert summary["n_cells"] == 100


def test_stream_final_state_matches_batch_segment(tmp_path, capsys):
    # The streaming detector and the batch command, fed the same causal
    # cells, land on the same final partition.
    path = write_events(tmp_path / "s.csv", step_times())
    pen = repr(float(np.log(100)))
    code_s, out_s, _ = run_cli(capsys, ["stream", path, "--t0", "0.0",
                                        "--penalty", pen])
    code_g, out_g, _ = run_cli(capsys, ["segment", path, "--cells", "gap",
                                        "--t0", "0.0", "--penalty", pen])
    assert code_s == code_g == 0
    summary = json.loads(out_s.strip().splitlines()[-1])
    doc = json.loads(out_g)
    assert summary["changepoints"] == doc["changepoints"]
    assert summary["total_fitness"] == pytest.approx(
        doc["total_fitness"], rel=1e-12
    )


def test_stream_drops_out_of_order_records(tmp_path, capsys):
    path = tmp_path / "o.csv"
    path.write_text("1.0\n2.0\n1.5\n3.0\n")
    code, out, err = run_cli(
        capsys, ["stream", str(path), "--t0", "0.0", "--penalty", "1.0"]
    )
    assert code == 0
    assert "dropped record at line 3" in err
    summary = json.loads(out.strip().splitlines()[-1])
    assert summary["n_records"] == 4
    assert summary["n_cells"] == 3
    assert summary["n_dropped"] == 1


def test_stream_first_record_anchors_without_t0(tmp_path, capsys):
    path = tmp_path / "a.csv"
    path.write_text("10.0\n11.0\n12.5\n")
    code, out, _ = run_cli(capsys, ["stream", str(path), "--penalty", "0.5"])
    assert code == 0
    summary = json.loads(out.strip().splitlines()[-1])
    assert summary["n_records"] == 3
    assert summary["n_cells"] == 2  # the anchor contributes no cell


def test_stream_empty_input_summary_only(tmp_path, capsys):
    path = tmp_path / "empty.csv"
    path.write_text("# nothing yet\n")
    code, out, _ = run_cli(capsys, ["stream", str(path), "--penalty", "1.0"])
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 1
    summary = json.loads(lines[0])
    assert summary["n_records"] == 0
    assert summary["n_cells"] == 0
    assert summary["total_fitness"] is None
    assert summary["changepoints"] == []


def test_stream_requires_penalty(tmp_path, capsys):
    path = write_events(tmp_path / "s.csv", [1.0, 2.0])
    code, _, err = run_cli(capsys, ["stream", str(path)])
    assert code == 1
    assert "--penalty" in err


def test_stream_csv_format(tmp_path, capsys):
    path = write_events(tmp_path / "s.csv", step_times())
    code, out, _ = run_cli(
        capsys, ["stream", path, "--t0", "0.0", "--format", "csv",
                 "--penalty", repr(float(np.log(100)))]
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "n_processed,latest_block_start,opt_value"
    body = [l for l in lines if not l.startswith("#") and "," in l][1:]
    assert [tuple(map(float, l.split(",")[:2])) for l in body] == [
        (1.0, 1.0), (53.0, 50.0), (54.0, 53.0), (55.0, 50.0)
    ]
    assert any(l.startswith("# n_emissions=4") for l in lines)


# ---------------------------------------------------------------------------
# bench and oracle-check


def test_bench_reports_exact_eval_counts(capsys):
    code, out, err = run_cli(capsys, ["bench", "--sizes", "100,200"])
    assert code == 0
    doc = json.loads(out)
    assert set(doc["backends"]) <= {"numba", "numpy"}
    for point in doc["points"]:
        n = point["n_cells"]
        assert point["n_fitness_evals"] == n * (n + 1) // 2
        assert point["median_seconds"] > 0
    assert {p["n_cells"] for p in doc["points"]} == {100, 200}
    for ratio in doc["doubling_ratios"]:
        assert ratio["n2"] == 2 * ratio["n"]
    assert "backend" in err  # human-readable table goes to stderr


def test_bench_rejects_bad_sizes(capsys):
    code, _, err = run_cli(capsys, ["bench", "--sizes", "10,zero"])
    assert code == 1
    assert "--sizes" in err


def test_oracle_check_all_match(capsys):
    code, out, _ = run_cli(
        capsys, ["oracle-check", "--trials", "4", "--max-cells", "9"]
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["all_match"] is True
    assert doc["n_instances_checked"] == 4 * 3 * 2  # trials x kinds x penalties


def test_oracle_check_rejects_silly_limits(capsys):
    code, _, err = run_cli(capsys, ["oracle-check", "--max-cells", "30"])
    assert code == 1
    assert "--max-cells" in err
