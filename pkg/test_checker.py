"""
Test script for the model checker.

This script tests verdicts on the bundled chains, the epsilon-halving loop,
super-operator semantics and the soundness of conclusive verdicts against
directly simulated trajectories.
"""

import json
import math

import numpy as np
import pytest

from src.channels import (
    aklt_channel, amplitude_damping, basis_state, cluster_channel, cycle_permutation_chain, identity_channel,
    not_gate, phase_rotation, plus_state, random_distribution, random_stochastic,
)
from src.checker import CheckReport, Verdict, check_state, check_superop, check_with_refinement, lift_props
from src.config import CheckConfig
from src.errors import InputError, NotPeriodicallyStableError
from src.ltl import LassoWord, eval_lasso, parse
from src.props import Interval, ObservableProp, TraceProp, Window, label_state
from src.spectral import limit_states, stability_report
from src.superop import QMC, embed_classical_mc, superop_trajectory_traces, trajectory

P1 = np.diag([0.0, 1.0])
NONZERO = Window.of(Interval.open(-math.inf, 0.0), Interval.open(0.0, math.inf))


def one_prop(window=None):
    return ObservableProp("one", P1, window or Window.of(Interval.open(0.5, math.inf)))


def test_amplitude_damping_settles():
    g = QMC(amplitude_damping(0.3), basis_state(2, 1))
    a = ObservableProp("a", P1, Window.of(Interval(0.0, 0.1)))
    verdict, report = check_state(g, [a], parse("F G a"), 0.05)
    assert verdict is Verdict.TRUE
    assert report.cycle_letter_sets == ((1,),)
    assert report.prefix_letters[0] == 0
    verdict, report = check_state(g, [a], parse("G a"), 0.05)
    assert verdict is Verdict.FALSE
    assert report.satisfying_witness is None
    w = report.violating_witness
    assert w is not None
    assert not eval_lasso(parse("G a"), LassoWord(w.prefix_letters, w.cycle_letters), ("a",))


def test_true_formula_needs_no_halving():
    g = QMC(amplitude_damping(0.3), basis_state(2, 1))
    verdict, reports = check_with_refinement(g, [one_prop()], parse("true"))
    assert verdict is Verdict.TRUE
    assert len(reports) == 1
    assert reports[0].epsilon == 0.5


def test_not_channel_alternates():
    g = QMC(not_gate(), basis_state(2, 0))
    verdict, reports = check_with_refinement(g, [one_prop()], parse("G (one -> X !one) & G F one"))
    assert verdict is Verdict.TRUE
    assert all(r.verdict is not Verdict.FALSE for r in reports)
    final = reports[-1]
    assert final.period == 2
    assert final.horizon % 2 == 0
    assert final.prefix_letters == tuple(n % 2 for n in range(final.horizon))

    verdict, reports = check_with_refinement(g, [one_prop()], parse("F G one"))
    assert verdict is Verdict.FALSE


def test_boundary_expectation_stays_unknown():
    g = QMC(identity_channel(2), plus_state())
    prop = one_prop(Window.of(Interval(0.5, math.inf)))
    cfg = CheckConfig(max_halvings=3)
    verdict, reports = check_with_refinement(g, [prop], parse("F G one"), cfg)
    assert verdict is Verdict.UNKNOWN
    assert [r.epsilon for r in reports] == [0.5, 0.25, 0.125, 0.0625]
    assert all(r.ambiguous == ("one",) for r in reports)
    assert reports[-1].satisfying_witness is not None
    assert reports[-1].violating_witness is not None


def test_unstable_chain_is_rejected():
    g = QMC(phase_rotation(1 / math.sqrt(2)), plus_state())
    with pytest.raises(NotPeriodicallyStableError) as info:
        check_with_refinement(g, [one_prop()], parse("G F one"))
    assert len(info.value.offending) == 2


def test_superop_angle_cap_follows_channel_dimension():
    g = QMC(phase_rotation(1 / 5))
    i2 = TraceProp("i2", NONZERO)
    assert stability_report(g).stable is False
    with pytest.raises(NotPeriodicallyStableError):
        check_with_refinement(g, [i2], parse("G F i2"))
    with pytest.raises(NotPeriodicallyStableError):
        check_superop(g, [i2], parse("G F i2"), 0.5)
    _, reports = check_with_refinement(g, [i2], parse("G F i2"), CheckConfig(qmax=5, max_halvings=1))
    assert reports[0].period == 5


def test_state_semantics_rejects_trace_props():
    g = QMC(not_gate(), basis_state(2, 0))
    with pytest.raises(InputError):
        check_with_refinement(g, [TraceProp("i2", NONZERO)], parse("G i2"))


def test_mps_formulas_become_true():
    for channel in (aklt_channel(), cluster_channel()):
        for text in ("X^3 G i2", "X^3 F G i2"):
            verdict, reports = check_with_refinement(QMC(channel), [TraceProp("i2", NONZERO)], parse(text))
            assert verdict is Verdict.TRUE, text
            assert len(reports) <= 7
            assert reports[0].verdict is Verdict.UNKNOWN
            for r in reports:
                if r.epsilon >= 0.25:
                    assert r.verdict is not Verdict.FALSE


def test_lift_props_rejects_wrong_dimension():
    g = QMC(aklt_channel())
    with pytest.raises(InputError):
        lift_props(g, [one_prop()])
    lifted = lift_props(g, [TraceProp("i2", NONZERO)])
    assert lifted[0].dim == 4
    assert lifted[0].spectrum_bounds[1] == pytest.approx(4.0)


def test_superop_prefix_matches_channel_traces():
    g = QMC(amplitude_damping(0.3))
    big = TraceProp("big", Window.of(Interval(2.5, math.inf)))
    verdict, report = check_superop(g, [big], parse("F G !big"), 0.1)
    assert verdict is Verdict.TRUE
    traces = superop_trajectory_traces(g.superop, report.horizon)
    for n, letter in enumerate(report.prefix_letters):
        assert letter == int(big.window.contains(traces[n]))
    assert report.prefix_letters[:4] == (1, 1, 1, 1)


def soundness_corpus():
    """Classical and quantum chains with two propositions each."""
    rng = np.random.default_rng(77)
    chains = [
        QMC(amplitude_damping(0.4), basis_state(2, 1)),
        QMC(not_gate(), basis_state(2, 0)),
        QMC(amplitude_damping(0.2), plus_state()),
    ]
    for _ in range(4):
        chains.append(embed_classical_mc(random_stochastic(3, rng), random_distribution(3, rng)))
    for _ in range(2):
        P = 0.5 * cycle_permutation_chain(3) + 0.5 * cycle_permutation_chain(3) @ random_stochastic(3, rng)
        chains.append(embed_classical_mc(P, random_distribution(3, rng)))

    corpus = []
    for g in chains:
        d = g.dim
        props = []
        for k in range(2):
            diag = rng.random(d)
            lo = float(rng.uniform(0.2, 0.6))
            props.append(ObservableProp(f"p{k}", np.diag(diag), Window.of(Interval(lo, math.inf))))
        corpus.append((g, props))
    return corpus


FORMULAS = ["G F p0", "F G p1", "p0 U p1", "G (p0 -> X p1)", "F p0 & G !p1", "X^2 (p0 | p1)"]


def simulated_word(g, props, report):
    """Labels of the true trajectory up to K + 4 period, then the limit-state labels."""
    theta = report.period
    length = report.horizon + 4 * theta
    states = trajectory(g, length - 1)
    prefix = tuple(label_state(rho, props) for rho in states)
    etas = limit_states(g, theta)
    cycle = tuple(label_state(etas[(length + i) % theta], props) for i in range(theta))
    return LassoWord(prefix, cycle)


def test_conclusive_verdicts_are_sound():
    names = ("p0", "p1")
    for g, props in soundness_corpus():
        for text in FORMULAS:
            phi = parse(text)
            for eps in (0.1, 0.05):
                verdict, report = check_state(g, props, phi, eps)
                if verdict is Verdict.UNKNOWN:
                    continue
                expected = verdict is Verdict.TRUE
                assert eval_lasso(phi, simulated_word(g, props, report), names) == expected, text


def test_simulated_labels_stay_in_cycle_sets():
    for g, props in soundness_corpus():
        verdict, report = check_state(g, props, parse("G F p0"), 0.1)
        k, theta = report.horizon, report.period
        assert k > 0 and k % theta == 0
        states = trajectory(g, k + 60)
        for n in range(k):
            assert label_state(states[n], props) == report.prefix_letters[n]
        for n in range(k, k + 61):
            assert label_state(states[n], props) in report.cycle_letter_sets[(n - k) % theta]


def test_conclusive_verdicts_persist_when_halving():
    for g, props in soundness_corpus():
        for text in FORMULAS:
            phi = parse(text)
            verdict, _ = check_state(g, props, phi, 0.1)
            if verdict is Verdict.UNKNOWN:
                continue
            halved, _ = check_state(g, props, phi, 0.05)
            assert halved is verdict, text


def test_report_round_trip():
    g = QMC(identity_channel(2), plus_state())
    prop = one_prop(Window.of(Interval(0.5, math.inf)))
    _, reports = check_with_refinement(g, [prop], parse("F G one"), CheckConfig(max_halvings=1))
    for report in reports:
        data = json.loads(json.dumps(report.to_dict()))
        assert CheckReport.from_dict(data) == report
        assert set(data["timings"]) >= {"spectral", "horizon", "prefix", "emptiness"}


def test_automata_sink_receives_automata():
    g = QMC(not_gate(), basis_state(2, 0))
    sink = {}
    check_state(g, [one_prop()], parse("G F one"), 0.25, automata_sink=sink)
    assert set(sink) == {"neighborhood", "formula", "negation"}
    assert sink["neighborhood"].ap_names == ("one",)


def main():
    """Main function to run the checker tests."""
    tests = [
        test_amplitude_damping_settles,
        test_true_formula_needs_no_halving,
        test_not_channel_alternates,
        test_boundary_expectation_stays_unknown,
        test_unstable_chain_is_rejected,
        test_superop_angle_cap_follows_channel_dimension,
        test_state_semantics_rejects_trace_props,
        test_mps_formulas_become_true,
        test_lift_props_rejects_wrong_dimension,
        test_superop_prefix_matches_channel_traces,
        test_conclusive_verdicts_are_sound,
        test_simulated_labels_stay_in_cycle_sets,
        test_conclusive_verdicts_persist_when_halving,
        test_report_round_trip,
        test_automata_sink_receives_automata,
    ]
    print("Testing the checker...")
    for test in tests:
        try:
            test()
            print(f"✅ {test.__name__}")
        except AssertionError as e:
            print(f"❌ {test.__name__}: {e}")


if __name__ == "__main__":
    main()
