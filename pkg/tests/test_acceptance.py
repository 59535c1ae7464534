"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with -s to see them live). Criteria cover oracle
equivalence of the optimizer, the fair-copying worked example, dominance and
monotonicity, the efficiency and latency formulas, simulation identities,
the hand-checked throughput gain, qualitative busy-rate trends, enumeration
correctness, and byte-level determinism of the CLI."""

import itertools
import json
import math
import random
import time

import pytest

from conftest import make_profile
from headbalance.allocate import (
    brute_force_best,
    efficiency,
    gpu_loads,
    optimize_plan,
    select_best,
    sha_plan,
)
from headbalance.cli import main as cli_main
from headbalance.latency import LatencyModel, MeasurementSample, calibrate, predict_compute
from headbalance.profiles import SyntheticSpec, generate_profile, save_profile
from headbalance.schemes import EnumerationConfig, count_schemes, enumerate_schemes
from headbalance.simulate import SimulationConfig, compare, decompose, simulate


def report(criterion: str, ok: bool, detail: str = "") -> None:
    line = f"{'PASS' if ok else 'FAIL'} {criterion}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


def cfg_for(ch, r_max, tp):
    return EnumerationConfig(ch_budget=ch, r_max=r_max, require_divisible=True, tp=tp)


def random_instances(seed, count):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        tp = rng.choice([2, 4])
        n = rng.randint(2, 8)
        ch = rng.randint(0, 2)
        r_max = rng.randint(1, 2)
        if not any((n + e) % tp == 0 for e in range(0, min(ch, n * (r_max - 1)) + 1)):
            continue
        weights = [rng.uniform(0.0, 10.0) for _ in range(n)]
        out.append((weights, tp, ch, r_max))
    return out


def test_criterion_1_oracle_equivalence():
    started = time.time()
    mismatches = 0
    instances = random_instances(seed=1001, count=500)
    for weights, tp, ch, r_max in instances:
        cfg = cfg_for(ch, r_max, tp)
        if select_best(weights, tp, cfg).delta != brute_force_best(weights, tp, cfg).delta:
            mismatches += 1
    elapsed = time.time() - started
    report(
        "criterion 1: oracle equivalence on 500 random instances",
        mismatches == 0 and elapsed <= 60.0,
        f"{mismatches} mismatches, {elapsed:.1f}s",
    )


def test_criterion_2_fair_copying_worked_example():
    no_copies = select_best([4.0, 1.0, 1.0, 2.0], 2, cfg_for(0, 1, 2))
    with_copies = select_best([4.0, 1.0, 1.0, 2.0], 2, cfg_for(2, 2, 2))
    replicated = {
        c.head_id for g in with_copies.groups for c in g if c.replica_count == 2
    }
    report(
        "criterion 2: fair-copying worked example",
        no_copies.delta == 2.0 and with_copies.delta == 0.0 and replicated == {0, 3},
        f"deltas {no_copies.delta}/{with_copies.delta}, replicated {sorted(replicated)}",
    )


def test_criterion_3_dominance_and_monotonicity():
    violations = 0
    checked = 0
    for weights, tp, _, _ in random_instances(seed=3003, count=500):
        if len(weights) % tp != 0:
            continue
        checked += 1
        deltas = [
            select_best(weights, tp, cfg_for(ch, 2, tp)).delta for ch in (0, 1, 2)
        ]
        static = sha_plan(make_profile([weights]), tp).layers[0].delta
        if not (deltas[2] <= deltas[1] <= deltas[0] <= static):
            violations += 1
    report(
        "criterion 3: copy-budget monotonicity and static dominance",
        violations == 0 and checked >= 300,
        f"{checked} instances, {violations} violations",
    )


def test_criterion_4_efficiency_formula():
    uneven = make_profile([[3.0, 1.0]])
    even = make_profile([[2.0, 2.0, 2.0, 2.0]])
    e_uneven = efficiency(sha_plan(uneven, 2), uneven)
    e_even = efficiency(sha_plan(even, 2), even)
    report(
        "criterion 4: utilization formula",
        abs(e_uneven - 2.0 / 3.0) <= 1e-12 and e_even == 1.0,
        f"E(3,1)={e_uneven!r}, E(equal)={e_even!r}",
    )


def test_criterion_5_calibration_roundtrip():
    truth = (1.0, 0.5, 0.01, 0.001)
    grid = [(b, c) for b in (1, 2, 4, 8) for c in (0.0, 32.0, 128.0, 512.0)]
    samples = [
        MeasurementSample(b, c, truth[0] + truth[1] * b + truth[2] * c + truth[3] * b * c)
        for b, c in grid
    ]
    model = calibrate(samples).model
    fitted = (model.c0, model.c1, model.c2, model.c3)
    recovered = all(abs(got - want) <= 1e-6 for got, want in zip(fitted, truth))
    slope_low = predict_compute(model, 2, 10.0) - predict_compute(model, 1, 10.0)
    slope_high = predict_compute(model, 2, 400.0) - predict_compute(model, 1, 400.0)
    report(
        "criterion 5: calibration round-trip and slope steepening",
        recovered and model.c3 > 0 and slope_high > slope_low,
        f"fitted {fitted}",
    )


def test_criterion_6_simulation_identities():
    rng = random.Random(66)
    identity_ok = True
    busy_ok = True
    for _ in range(25):
        n = rng.choice([4, 6, 8])
        rows = [[rng.uniform(0.0, 10.0) + 0.01 for _ in range(n)]
                for _ in range(rng.randint(1, 3))]
        profile = make_profile(rows)
        model = LatencyModel(1e-4, 1e-6, 1e-4, 1e-7, comm_alpha=2e-5,
                             comm_beta=1e-9, bytes_per_activation=1024.0)
        simcfg = SimulationConfig(batch=rng.randint(1, 8),
                                  decode_steps=rng.randint(1, 4), tp=2)
        base = simulate(profile, sha_plan(profile, 2), model, simcfg)
        tuned = simulate(profile, optimize_plan(profile, 2, cfg_for(2, 2, 2)),
                         model, simcfg)
        d = decompose(base, tuned)
        if d.d_total != d.d_idle + d.d_cache + d.d_comm:
            identity_ok = False
        for rep in (base, tuned):
            if not (0.0 < rep.mean_busy_rate <= 1.0):
                busy_ok = False

    uniform = make_profile([[2.0, 2.0, 2.0, 2.0]])
    comp = compare(uniform, 2, cfg_for(2, 2, 2), LatencyModel(0, 0, 1.0, 0),
                   SimulationConfig(batch=2, decode_steps=3, tp=2))
    gains_ok = all(abs(r.throughput_gain - 1.0) <= 1e-9 for r in comp.results)
    report(
        "criterion 6: decomposition identity, busy-rate range, uniform gains",
        identity_ok and busy_ok and gains_ok,
    )


def test_criterion_7_hand_checked_gain():
    profile = make_profile([[4.0, 1.0, 1.0, 2.0]])
    comp = compare(profile, 2, cfg_for(2, 2, 2), LatencyModel(0.0, 0.0, 1.0, 0.0),
                   SimulationConfig(batch=5, decode_steps=4, tp=2))
    gain = comp.by_name("dp").throughput_gain
    report(
        "criterion 7: hand-checked throughput gain 1.25",
        abs(gain - 1.25) <= 1e-9,
        f"gain={gain!r}",
    )


def test_criterion_8_qualitative_busy_rate_trends():
    spec = SyntheticSpec("zipf", param=1.2, total_budget_per_layer=1000.0, seed=7)
    profile = generate_profile(spec, 1, 32)
    model = LatencyModel(1e-4, 1e-6, 1e-4, 1e-7, comm_alpha=5e-5,
                         comm_beta=1e-9, bytes_per_activation=2048.0)
    sha_rates = []
    chain_ok = True
    detail = []
    for tp in (2, 4, 8):
        comp = compare(profile, tp, cfg_for(2, 2, 2), model,
                       SimulationConfig(batch=8, decode_steps=4, tp=tp),
                       node_budget=60_000)
        sha = comp.by_name("sha").report.mean_busy_rate
        nodp = comp.by_name("nodp").report.mean_busy_rate
        dp = comp.by_name("dp").report.mean_busy_rate
        sha_rates.append(sha)
        detail.append(f"tp={tp}: {sha:.3f}/{nodp:.3f}/{dp:.3f}")
        if not (dp >= nodp >= sha):
            chain_ok = False
    decreasing = sha_rates[0] > sha_rates[1] > sha_rates[2]
    report(
        "criterion 8: busy-rate direction (static declines with tp; copies help)",
        decreasing and chain_ok,
        "; ".join(detail),
    )


def test_criterion_9_enumeration_correctness():
    exhaustive_ok = True
    for n in range(1, 7):
        for ch in range(0, 4):
            for r_max in range(1, 4):
                cfg = EnumerationConfig(ch, r_max)
                got = [s.replicas for s in enumerate_schemes(n, cfg)]
                want = sorted(
                    vec
                    for vec in itertools.product(range(1, r_max + 1), repeat=n)
                    if sum(vec) - n <= ch
                )
                if got != want:
                    exhaustive_ok = False
    count = count_schemes(4, EnumerationConfig(2, 2))
    report(
        "criterion 9: enumeration matches brute force; count(4,2,2) = 11",
        exhaustive_ok and count == 11,
        f"count={count}",
    )


def test_criterion_10_cli_determinism(tmp_path):
    profile_path = tmp_path / "profile.json"
    save_profile(generate_profile(
        SyntheticSpec("zipf", param=1.1, total_budget_per_layer=64.0, seed=11), 2, 8
    ), profile_path)
    model_path = tmp_path / "model.json"
    model_path.write_text(json.dumps({
        "c0": 1e-4, "c1": 1e-6, "c2": 1e-4, "c3": 1e-7,
        "comm_alpha": 2e-5, "comm_beta": 1e-9, "bytes_per_activation": 1024.0,
    }))
    args = ["compare", "--profile", str(profile_path), "--tp", "2", "--ch", "2",
            "--rmax", "2", "--model", str(model_path), "--batch", "4",
            "--steps", "3"]
    out_a, out_b = tmp_path / "a.json", tmp_path / "b.json"
    code_a = cli_main(args + ["--out", str(out_a)])
    code_b = cli_main(args + ["--out", str(out_b)])
    identical = out_a.read_bytes() == out_b.read_bytes()
    report(
        "criterion 10: byte-identical comparison reports",
        code_a == 0 and code_b == 0 and identical,
    )
