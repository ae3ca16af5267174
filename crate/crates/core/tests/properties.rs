use proptest::prelude::*;

use dtsc_core::energy::{energy_adiabatic, sweep, SweepAxis};
use dtsc_core::mapper::min_feasible_ct;
use dtsc_core::montecarlo::{capacitor_values, SamplerKind, VariationSampler};
use dtsc_core::report::{energy_csv, parse_energy_csv};
use dtsc_core::tl::tl_decide;
use dtsc_core::{
    capacitive_load, eval_software_neuron, map_weights, max_load_search, mc_run, membrane_voltages,
    sample_variation, simulate, total_energy, tree_capacitances, AcnConfig, EnergyParams,
    FixtureSet, InputVector, McTarget, NeuronSpec, PowerClock, TechProfile, TlModel, TlVariant,
    Tree, VariationModel,
};

fn weight() -> impl Strategy<Value = f64> {
    prop_oneof![
        1 => Just(0.0),
        8 => (0.05f64..=1.0, any::<bool>()).prop_map(|(m, neg)| if neg { -m } else { m }),
    ]
}

fn neuron(max_n: usize) -> impl Strategy<Value = NeuronSpec> {
    (prop::collection::vec(weight(), 1..=max_n), -0.5f64..=0.5)
        .prop_filter_map("all-zero weights", |(w, b)| NeuronSpec::new(w, b).ok())
}

fn mapped(max_n: usize) -> impl Strategy<Value = (NeuronSpec, AcnConfig)> {
    neuron(max_n).prop_filter_map("infeasible", |spec| {
        let tech = TechProfile::reference();
        let ct = min_feasible_ct(&spec, &tech);
        map_weights(&spec, &tech, ct).ok().map(|cfg| (spec, cfg))
    })
}

fn vector(n: usize) -> impl Strategy<Value = InputVector> {
    prop::collection::vec(any::<bool>(), n).prop_map(InputVector::new)
}

fn with_vector(max_n: usize) -> impl Strategy<Value = (NeuronSpec, AcnConfig, InputVector)> {
    mapped(max_n).prop_flat_map(|(s, c)| {
        let n = s.len();
        (Just(s), Just(c), vector(n))
    })
}

fn params() -> EnergyParams {
    let f = FixtureSet::embedded();
    let cfg = f.config().unwrap();
    let rows = dtsc_core::verify::calibration_rows(&f, &cfg).unwrap();
    dtsc_core::calibrate_energy(&rows, &PowerClock::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn positive_scaling_keeps_decisions(spec in neuron(8), a in 0.01f64..100.0, bits in vector(8)) {
        let x = InputVector::new(bits.bits()[..spec.len()].to_vec());
        let scaled = NeuronSpec::new(spec.weights().iter().map(|w| w * a).collect(), spec.bias() * a).unwrap();
        let m = spec.margin(&x).unwrap();
        prop_assume!(m.abs() > 1e-9);
        prop_assert_eq!(eval_software_neuron(&spec, &x).unwrap(), eval_software_neuron(&scaled, &x).unwrap());
    }

    #[test]
    fn excitatory_inputs_are_monotone((spec, _cfg, x) in with_vector(8)) {
        for i in 0..spec.len() {
            if spec.weights()[i] > 0.0 && !x.get(i) && eval_software_neuron(&spec, &x).unwrap() {
                prop_assert!(eval_software_neuron(&spec, &x.with_bit(i, true)).unwrap());
            }
        }
    }

    #[test]
    fn mapping_preserves_weight_order((spec, cfg) in mapped(10)) {
        let w = spec.weights();
        for a in &cfg.synapses {
            for b in &cfg.synapses {
                if w[a.index].abs() < w[b.index].abs() {
                    prop_assert!(a.cap_ff <= b.cap_ff);
                }
            }
            prop_assert_eq!(a.tree, Tree::of_weight(w[a.index]).unwrap());
        }
        prop_assert_eq!(cfg.synapses.len(), w.iter().filter(|v| **v != 0.0).count());
    }

    #[test]
    fn synapse_sum_stays_near_target((spec, cfg) in mapped(10)) {
        let tech = TechProfile::reference();
        let ct = min_feasible_ct(&spec, &tech);
        let sum: f64 = cfg.synapses.iter().map(|s| s.cap_ff).sum();
        prop_assert!((sum - ct).abs() <= 0.5 * tech.cap_grid_ff * cfg.synapses.len() as f64 + 1e-9);
        prop_assert!(cfg.synapses.iter().all(|s| s.cap_ff >= tech.c_min_ff));
    }

    #[test]
    fn trees_are_balanced((_s, cfg) in mapped(10)) {
        prop_assert_eq!(cfg.total_ff(Tree::Positive), cfg.total_ff(Tree::Negative));
    }

    #[test]
    fn load_equals_series_reduction((_s, cfg, x) in with_vector(10)) {
        let state = tree_capacitances(&cfg, &x).unwrap();
        let mut expected = 0.0;
        for t in Tree::BOTH {
            let s = state.get(t);
            if s.on_ff > 0.0 && s.off_ff > 0.0 {
                expected += 1.0 / (1.0 / s.on_ff + 1.0 / s.off_ff);
            }
        }
        let got = capacitive_load(&cfg, &x).unwrap();
        prop_assert!((got - expected).abs() <= 1e-9 * expected.max(1.0));
    }

    #[test]
    fn maximum_load_is_locally_optimal((_s, cfg) in mapped(10)) {
        let best = max_load_search(&cfg);
        for i in 0..cfg.n_inputs {
            let flipped = best.vector.with_bit(i, !best.vector.get(i));
            prop_assert!(capacitive_load(&cfg, &flipped).unwrap() <= best.load_ff + 1e-9);
        }
    }

    #[test]
    fn membrane_voltage_is_linear_and_monotone((_s, cfg, x) in with_vector(10), v in 0.1f64..3.0) {
        let (p1, m1) = membrane_voltages(&cfg, &x, 1.0).unwrap();
        let (pv, mv) = membrane_voltages(&cfg, &x, v).unwrap();
        prop_assert!((pv - v * p1).abs() < 1e-12 && (mv - v * m1).abs() < 1e-12);
        for i in 0..cfg.n_inputs {
            if x.get(i) {
                continue;
            }
            if let Some(s) = cfg.synapse(i) {
                let (p2, m2) = membrane_voltages(&cfg, &x.with_bit(i, true), 1.0).unwrap();
                match s.tree {
                    Tree::Positive => prop_assert!(p2 > p1 && m2 == m1),
                    Tree::Negative => prop_assert!(m2 > m1 && p2 == p1),
                }
            }
        }
    }

    #[test]
    fn higher_threshold_never_fires_more(vp in 0.0f64..1800.0, vm in 0.0f64..1800.0, lo in 0.0f64..50.0, extra in 0.0f64..50.0) {
        let a = TlModel::ideal().with_threshold(lo);
        let b = TlModel::ideal().with_threshold(lo + extra);
        if tl_decide(&b, vp, vm).unwrap().output {
            prop_assert!(tl_decide(&a, vp, vm).unwrap().output);
        }
    }

    #[test]
    fn hardware_agrees_above_quantization_margin((spec, cfg, x) in with_vector(8)) {
        let delta = spec.len() as f64 * TechProfile::reference().cap_grid_ff / cfg.unit_cap_ff;
        prop_assume!(spec.margin(&x).unwrap().abs() > delta);
        let hw = simulate(&cfg, &x, &PowerClock::default(), &TlModel::ideal(), None).unwrap();
        prop_assert_eq!(hw.decision.output, eval_software_neuron(&spec, &x).unwrap());
    }

    #[test]
    fn adiabatic_loss_scales_with_load_squared(c1 in 1.0f64..2000.0, c2 in 1.0f64..2000.0, r in 1e2f64..1e5, t in 1e-8f64..1e-5) {
        let k1 = energy_adiabatic(c1, 1.8, r, t) / (c1 * c1);
        let k2 = energy_adiabatic(c2, 1.8, r, t) / (c2 * c2);
        prop_assert!((k1 - k2).abs() <= 1e-12 * k1.abs());
    }

    #[test]
    fn breakdown_sums((_s, cfg, x) in with_vector(10)) {
        let tl = TlModel::new(TlVariant::Proposed);
        let b = total_energy(&cfg, &x, &PowerClock::default(), &params(), &tl).unwrap();
        prop_assert!((b.e_total_fj - (b.e_pcg_fj + b.e_tl_fj + b.e_al_fj)).abs() < 1e-9);
        prop_assert!(b.e_al_fj >= 0.0 && b.e_pcg_fj > 0.0);
    }

    #[test]
    fn energy_report_reparses_at_resolution((_s, cfg, x) in with_vector(10)) {
        let b = total_energy(&cfg, &x, &PowerClock::default(), &params(), &TlModel::ideal()).unwrap();
        let text = energy_csv(&[(x.clone(), b)]).unwrap();
        let rec = &parse_energy_csv(&text).unwrap()[0];
        prop_assert_eq!(&rec.vector, &x);
        prop_assert!((rec.load_ff - b.load_ff).abs() <= 0.005 + 1e-9);
        prop_assert!((rec.f_op_khz - b.f_op_hz / 1e3).abs() <= 0.005 + 1e-9);
        prop_assert!((rec.e_al_fj - b.e_al_fj).abs() <= 0.05 + 1e-9);
        prop_assert!((rec.e_acn_syn_fj - b.acn_synapse_fj()).abs() <= 0.05 + 1e-9);
        prop_assert!((rec.savings_pct - b.savings_pct).abs() <= 0.005 + 1e-9);
        // the emitted text is a fixed point
        let again = energy_csv(&[(x, b)]).unwrap();
        prop_assert_eq!(text, again);
    }

    #[test]
    fn variation_draws_are_positive_and_deterministic((_s, cfg) in mapped(10), seed in any::<u64>(), i in 0u64..1000) {
        let model = VariationModel { seed, ..VariationModel::default() };
        let p = params();
        let (a, pa) = sample_variation(&cfg, &p, &model, i).unwrap();
        let (b, pb) = sample_variation(&cfg, &p, &model, i).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(pa.r_syn_ohm, pb.r_syn_ohm);
        prop_assert!(capacitor_values(&a).iter().all(|c| *c > 0.0));
        prop_assert!(pa.r_syn_ohm > 0.0);
    }
}

#[test]
fn parallel_run_matches_serial_draws() {
    let f = FixtureSet::embedded();
    let cfg = f.config().unwrap();
    let x = f.table5_row("TV4").unwrap().vector.clone();
    let pc = PowerClock::default();
    let p = params();
    for sampler in [SamplerKind::Pseudorandom, SamplerKind::LowDiscrepancy] {
        let model = VariationModel { sampler, seed: 7, ..VariationModel::default() };
        let par = mc_run(&cfg, &x, &pc, &p, &model, 64, McTarget::Acn).unwrap();
        let serial: Vec<f64> = (0..64)
            .map(|i| {
                let (c, q) = sample_variation(&cfg, &p, &model, i).unwrap();
                total_energy(&c, &x, &pc, &q, &TlModel::ideal()).unwrap().acn_synapse_fj()
            })
            .collect();
        assert_eq!(par, serial);
        assert_eq!(par, mc_run(&cfg, &x, &pc, &p, &model, 64, McTarget::Acn).unwrap());
    }
}

#[test]
fn global_factor_statistics() {
    let f = FixtureSet::embedded();
    let cfg = f.config().unwrap();
    let model = VariationModel::default();
    let sampler = VariationSampler::new(&cfg, &model).unwrap();
    let n = 4000;
    let g: Vec<f64> = (0..n).map(|i| sampler.draw(i).unwrap().global).collect();
    let mean = g.iter().sum::<f64>() / n as f64;
    let sd = (g.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    assert!(mean.abs() < 4.0 * model.sigma_cap_global / (n as f64).sqrt(), "{mean}");
    assert!((sd / model.sigma_cap_global - 1.0).abs() < 0.06, "{sd}");
}

#[test]
fn sweep_rows_follow_point_then_vector_order() {
    let f = FixtureSet::embedded();
    let cfg = f.config().unwrap();
    let vectors: Vec<_> = f.vectors().into_iter().map(|(_, v)| v).collect();
    let points = [1.8, 1.5, 1.2, 1.0];
    let rows = sweep(&cfg, &vectors, SweepAxis::Voltage, &points, &PowerClock::default(), &params(), &TlModel::ideal()).unwrap();
    assert_eq!(rows.len(), points.len() * vectors.len());
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r.axis_value, points[i / vectors.len()]);
        assert_eq!(r.vector, vectors[i % vectors.len()]);
    }
    let freq = sweep(&cfg, &vectors[..2], SweepAxis::Frequency, &[1e5, 1e6, 1e7], &PowerClock::default(), &params(), &TlModel::ideal()).unwrap();
    assert!(freq.windows(2).all(|w| w[0].axis_value <= w[1].axis_value));
}
