//! Acceptance gate: one test per deliverable, each asserting its stated
//! tolerance and printing a `PASS` line per sub-check (run with
//! `--nocapture` to see them).
//!
//! Coverage: exact cycle counts, lengths, and rates of the bundled code
//! family; relocation-search trajectories; randomized equivalence of the
//! signature-based cycle counter with a brute-force graph search; merged-
//! spectrum prediction against direct enumeration of the coupled graph;
//! waterfall-ordering BER comparisons between coupled sets and longer
//! single chains; windowed-versus-block decoding performance and window
//! structure; and the windowed-latency bound.

use mdsc::code::{BlockCodeSpec, MdMappingSet, ScCodeSpec};
use mdsc::cycles::{
    classify_active, count_active, count_cycles, count_cycles_md, enumerate_signatures,
    predict_md_spectrum, CatalogScope,
};
use mdsc::decode::{latency_estimate, DecodeConfig, WindowPlan};
use mdsc::optimize::{construct_md, random_md, tau};
use mdsc::registry::CodeRegistry;
use mdsc::sim::{simulate, BerRecord, DecoderMode, SimPlan};
use mdsc::{brute_force_count, SparseBinaryMatrix};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ------------------------------------------------------- shared utilities --

fn spec_of(code: &str, l: Option<usize>) -> ScCodeSpec {
    CodeRegistry::builtin().code_spec(code, l).unwrap()
}

fn map_of(name: &str) -> MdMappingSet {
    CodeRegistry::builtin().map(name).unwrap().mapping_set()
}

/// Draws a small random coupled instance: an SC code with z ≤ 7, γ ≤ 3,
/// κ ≤ 5, L ≤ 4 plus a mapping set with L2 ≤ 4, uniform or per-chain.
fn random_instance(rng: &mut ChaCha8Rng, shared: bool) -> (ScCodeSpec, MdMappingSet) {
    loop {
        let gamma = rng.random_range(2..=3usize);
        let kappa = rng.random_range(2..=5usize);
        let z = rng.random_range(2..=7u32);
        let m = rng.random_range(1..=2usize);
        let l = rng.random_range((m + 1)..=4usize);
        let cm: Vec<Vec<u32>> =
            (0..gamma).map(|_| (0..kappa).map(|_| rng.random_range(0..z)).collect()).collect();
        let pm: Vec<Vec<u8>> =
            (0..gamma).map(|_| (0..kappa).map(|_| rng.random_range(0..=m as u8)).collect()).collect();
        let spec = ScCodeSpec { block: BlockCodeSpec { gamma, kappa, z, cm }, m, l, pm };
        if spec.validate().is_err() {
            continue;
        }
        let l2 = rng.random_range(2..=4usize);
        let d = rng.random_range(2..=l2);
        let relocations = rng.random_range(1..=gamma * kappa);
        let seed = rng.random_range(0..u64::MAX);
        let md = random_md(&spec, relocations, d, l2, shared, seed).unwrap();
        return (spec, md);
    }
}

fn run_point(code: &str, spec: &ScCodeSpec, md: Option<&MdMappingSet>, plan: SimPlan) -> BerRecord {
    let records = simulate(spec, md, &plan).unwrap();
    let r = records.into_iter().next().unwrap();
    println!(
        "      {code}: {} frames, {} bit / {} frame errors, BER {:.3e}, CI [{:.3e}, {:.3e}]",
        r.frames,
        r.bit_errors,
        r.frame_errors,
        r.ber,
        r.ber_ci95().0,
        r.ber_ci95().1
    );
    r
}

// ------------------------------------------------- 1: exact count targets --

#[test]
fn cycle_counts_code_lengths_and_rates_are_exact() {
    // Girth-6 family: cycles-6 of the single chain at three coupling
    // lengths, and of its 3- and 5-chain couplings.
    for (l, want) in [(10, 29_274), (30, 91_494), (50, 153_714)] {
        let got = count_cycles(&spec_of("sc1", Some(l)), 6).unwrap();
        assert_eq!(got, want, "cycles-6 of sc1@{l}");
        println!("PASS cycles-6 sc1@{l} = {got}");
    }
    for (map, want) in [("m2", 9_078), ("m3", 1_700)] {
        let got = count_cycles_md(&spec_of("sc1", None), &map_of(map), 6).unwrap();
        assert_eq!(got, want, "cycles-6 under {map}");
        println!("PASS cycles-6 sc1+{map} = {got}");
    }

    // Girth-8 family: cycles-8 of the long chain, and totals plus active
    // counts of the three 4-chain couplings of the short chain.
    let got = count_cycles(&spec_of("sc4", Some(40)), 8).unwrap();
    assert_eq!(got, 1_397_319, "cycles-8 of sc4@40");
    println!("PASS cycles-8 sc4@40 = {got}");
    let sc4 = spec_of("sc4", None);
    for (map, total, active) in
        [("m4", 292_560, 8_510), ("m5", 258_060, 7_521), ("m6", 249_320, 7_291)]
    {
        let md = map_of(map);
        let got = count_cycles_md(&sc4, &md, 8).unwrap();
        assert_eq!(got, total, "cycles-8 under {map}");
        let act = count_active(&sc4, &md, 8).unwrap();
        assert_eq!(act, active, "active cycles-8 under {map}");
        println!("PASS cycles-8 sc4+{map} = {got}, active = {act}");
    }

    // Girth-8 3-chain couplings: full short-cycle profile.
    let sc6 = spec_of("sc6", None);
    for (map, wants) in [("m7", [0, 2_856, 685_032]), ("m8", [0, 0, 643_110])] {
        let md = map_of(map);
        for (k, want) in [4, 6, 8].into_iter().zip(wants) {
            let got = count_cycles_md(&sc6, &md, k).unwrap();
            assert_eq!(got, want, "cycles-{k} under {map}");
        }
        println!("PASS cycles-4/6/8 sc6+{map} = {wants:?}");
    }

    // Lengths and design rates (rates to two decimals) of every compared
    // code: single chains at their lengths, couplings at L2 × constituent.
    let cases: [(&str, Option<usize>, usize, usize, f64); 7] = [
        ("sc1", None, 1, 2_890, 0.74),
        ("sc1", Some(30), 1, 8_670, 0.76),
        ("m2", None, 3, 8_670, 0.74),
        ("sc1", Some(50), 1, 14_450, 0.76),
        ("m3", None, 5, 14_450, 0.74),
        ("sc4", Some(40), 1, 17_480, 0.83),
        ("m4", None, 4, 17_480, 0.81),
    ];
    let reg = CodeRegistry::builtin();
    for (name, l, chains, length, rate) in cases {
        let spec = match reg.code(name) {
            Ok(_) => reg.code_spec(name, l).unwrap(),
            Err(_) => reg.map_constituent(reg.map(name).unwrap()).unwrap(),
        };
        assert_eq!(chains * spec.n(), length, "length of {name}");
        let got = (spec.design_rate() * 100.0).round() / 100.0;
        assert!((got - rate).abs() < 1e-9, "rate of {name}: {got} vs {rate}");
        println!("PASS {name}: length {length}, rate {got:.2}");
    }
}

// ------------------------------------------- 2: relocation-search targets --

#[test]
fn relocation_search_reaches_reference_trajectories() {
    let spec = spec_of("sc1", None);

    // Three chains, depth 3, five relocations: the active count must fall
    // along the reference trajectory and end at (or below) 92.
    let built = construct_md(&spec, 6, 3, 3, 5, 1).unwrap();
    let minima: Vec<u64> = built.tree.levels.iter().map(|s| s.min_active).collect();
    assert_eq!(minima.len(), 5, "search should run all five levels");
    assert!(built.active <= 92, "endpoint {} exceeds 92", built.active);
    assert_eq!(built.tree.nodes[0].active, 183, "root active count");
    match built.active {
        92 => println!("PASS L2=3 d=3 T=5: trajectory {minima:?} ends at 92"),
        v => println!("PASS L2=3 d=3 T=5: trajectory {minima:?} ends at {v} — strictly better than 92"),
    }

    // Five chains, eighteen relocations, depths two through five: endpoints
    // at or below the reference active counts.
    for (d, bound) in [(2, 26), (3, 12), (4, 7), (5, 7)] {
        let built = construct_md(&spec, 6, 5, d, 18, 1).unwrap();
        assert!(built.active <= bound, "L2=5 d={d} endpoint {} exceeds {bound}", built.active);
        if built.active < bound {
            println!("PASS L2=5 d={d} T=18: active {} — strictly better than {bound}", built.active);
        } else {
            println!("PASS L2=5 d={d} T=18: active {}", built.active);
        }
    }

    // With depth 2 and slack budget the search stops once no relocation
    // improves any leaf, rather than spending the full budget.
    let built = construct_md(&spec, 6, 5, 2, 30, 1).unwrap();
    assert!(built.tree.early_terminated, "T=30 at depth 2 should terminate early");
    assert!(built.tree.levels.len() <= 18, "ran {} levels", built.tree.levels.len());
    println!("PASS L2=5 d=2 T=30: early termination after {} levels", built.tree.levels.len());
}

// ------------------------------------------- 3: randomized oracle parity --

#[test]
fn cycle_counts_match_brute_force_on_randomized_codes() {
    let mut rng = ChaCha8Rng::seed_from_u64(2026);
    let mut nonzero = 0u64;
    for i in 0..24 {
        let (spec, md) = random_instance(&mut rng, i % 2 == 0);
        let h = spec.assemble_md(&md).unwrap();
        for k in [4, 6, 8] {
            let fast = count_cycles_md(&spec, &md, k).unwrap();
            let slow = brute_force_count(&h, k).unwrap();
            assert_eq!(
                fast, slow,
                "instance {i}: cycles-{k} mismatch on γ={} κ={} z={} m={} L={} L2={}",
                spec.block.gamma, spec.block.kappa, spec.block.z, spec.m, spec.l, md.l2
            );
            nonzero += u64::from(fast > 0);
        }
        // The single chain must agree with its own assembled graph too.
        let k1 = count_cycles(&spec, 6).unwrap();
        assert_eq!(k1, brute_force_count(&spec.assemble(), 6).unwrap(), "instance {i}: single chain");
    }
    assert!(nonzero >= 10, "batch too degenerate: only {nonzero} nonzero counts");
    println!("PASS 24 randomized instances agree with brute force at k ∈ {{4, 6, 8}} ({nonzero} nonzero counts)");
}

// --------------------------------- 4: merged-spectrum model consistency --

#[test]
fn merged_spectrum_prediction_matches_direct_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(777);
    let mut checked_lengths = 0u64;
    let mut active_classes = 0u64;
    for i in 0..20 {
        let (spec, md) = random_instance(&mut rng, true);
        let map = md.shared_map().unwrap().clone();

        // Predicted spectrum equals direct enumeration of the coupled
        // graph at every merged length.
        let spectrum = predict_md_spectrum(&spec, &md, 12).unwrap();
        for &(k, predicted) in &spectrum.totals {
            let direct = count_cycles_md(&spec, &md, k).unwrap();
            assert_eq!(
                predicted, direct,
                "instance {i}: merged length {k} on γ={} κ={} z={} m={} L={} L2={}",
                spec.block.gamma, spec.block.kappa, spec.block.z, spec.m, spec.l, md.l2
            );
            checked_lengths += 1;
        }

        // The three activity formulations coincide class by class: the
        // partition, the alternating sum Δ = 0, and τ = gcd(L2, Δ) = L2.
        for k in [4, 6] {
            let catalog = enumerate_signatures(&spec, k, CatalogScope::Whole).unwrap();
            let part = classify_active(&catalog, &md).unwrap();
            let realized: Vec<usize> = (0..catalog.classes.len())
                .filter(|&c| catalog.classes[c].lift_simple && catalog.classes[c].zero_closure)
                .collect();
            for &c in &realized {
                let delta = catalog.class_delta(&catalog.classes[c], &map, md.l2).unwrap();
                let in_active = part.active.contains(&c);
                assert_eq!(in_active, delta == 0, "instance {i}: partition vs Δ at class {c}");
                assert_eq!(delta == 0, tau(delta, md.l2) == md.l2, "instance {i}: Δ vs τ at class {c}");
                active_classes += u64::from(in_active);
            }
            assert_eq!(part.active.len() + part.inactive.len(), realized.len());
        }
    }
    assert!(checked_lengths >= 100, "too few merged lengths checked");
    println!("PASS 20 instances: spectrum equals direct enumeration at {checked_lengths} merged lengths; activity formulations coincide ({active_classes} active classes)");
}

// ------------------------------------------------ 5: waterfall ordering --

#[test]
fn chain_coupling_improves_waterfall_ber() {
    // Both comparisons pit a coupled set of short chains against a single
    // chain of the same total length and its own design rate, decoded
    // identically. The single chain must accumulate at least 100 frame
    // errors; the coupled side sits so deep in its waterfall that a frame
    // budget with a zero/low-error confidence bound is decisive.
    let sc1 = spec_of("sc1", None);
    for (snr, long_l, map, md_frames) in [(4.1, 30, "m2", 20_000), (3.85, 50, "m3", 20_000)] {
        let long = spec_of("sc1", Some(long_l));
        let mut plan = SimPlan::new(format!("sc1@{long_l}"), vec![snr]);
        plan.seed = 42;
        plan.max_frames = 60_000;
        plan.min_bit_errors = 1;
        plan.min_frame_errors = 100;
        let single = run_point(&format!("sc1@{long_l}"), &long, None, plan);

        let md = map_of(map);
        let mut plan = SimPlan::new(format!("sc1+{map}"), vec![snr]);
        plan.seed = 42;
        plan.max_frames = md_frames;
        plan.min_bit_errors = 0;
        plan.min_frame_errors = 0;
        let coupled = run_point(&format!("sc1+{map}"), &sc1, Some(&md), plan);

        assert!(single.frame_errors >= 100, "single chain saw only {} frame errors", single.frame_errors);
        assert!(coupled.ber < single.ber, "coupling failed to lower BER at {snr} dB");
        let (single_lo, _) = single.ber_ci95();
        let (_, coupled_hi) = coupled.ber_ci95();
        assert!(
            coupled_hi < single_lo,
            "confidence intervals overlap at {snr} dB: coupled ≤ {coupled_hi:.3e}, single ≥ {single_lo:.3e}"
        );
        println!(
            "PASS {snr} dB: BER(sc1+{map}) ≤ {coupled_hi:.3e} < {single_lo:.3e} ≤ BER(sc1@{long_l}), CIs disjoint"
        );
    }
}

// ------------------------------------- 6: windowed decoding performance --

#[test]
fn windowed_decoding_tracks_block_decoding() {
    // The five-chain coupling found by the depth-2 search, decoded at a
    // mid-waterfall point: a window of 4 replicas must stay within half an
    // order of magnitude of block decoding, and widening the window from 3
    // to 4 must not degrade further.
    let spec = spec_of("sc1", None);
    let built = construct_md(&spec, 6, 5, 2, 18, 1).unwrap();
    assert!(built.active <= 26);
    let md = built.mapping;
    let snr = 3.5;

    let mut plan = SimPlan::new("block", vec![snr]);
    plan.seed = 42;
    plan.max_frames = 20_000;
    plan.min_bit_errors = 1;
    plan.min_frame_errors = 100;
    let block = run_point("block", &spec, Some(&md), plan);

    let mut windowed = Vec::new();
    for w in [4, 3] {
        let mut plan = SimPlan::new(format!("window-{w}"), vec![snr]);
        plan.seed = 42;
        plan.max_frames = 20_000;
        plan.min_bit_errors = 800;
        plan.min_frame_errors = 25;
        plan.mode = DecoderMode::MdWindowed { w };
        windowed.push(run_point(&format!("window-{w}"), &spec, Some(&md), plan));
    }
    let (w4, w3) = (&windowed[0], &windowed[1]);
    assert!(block.frame_errors >= 100 && w4.frame_errors >= 25 && w3.frame_errors >= 25);

    let degradation4 = w4.ber / block.ber;
    let degradation3 = w3.ber / block.ber;
    assert!(
        degradation4.log10().abs() <= 0.5,
        "window 4 BER is {degradation4:.2}× block — beyond half an order"
    );
    assert!(
        degradation4 <= degradation3,
        "window 4 degrades more than window 3: {degradation4:.2}× vs {degradation3:.2}×"
    );
    println!(
        "PASS window-4 BER within 0.5 order of block ({degradation4:.2}×); window-3 ratio {degradation3:.2}×"
    );

    // Structure: every window holds W·κ·L2·z variable nodes until the
    // span reaches the end of the chains.
    let (kappa, z, l2) = (spec.block.kappa, spec.block.z as usize, md.l2);
    for w in [3, 4] {
        let plan = WindowPlan::md(&spec, &md, w, DecodeConfig::default()).unwrap();
        assert_eq!(plan.window_count(), spec.l);
        for l in 1..=spec.l {
            let expect = w.min(spec.l - l + 1) * kappa * z * l2;
            assert_eq!(plan.vn_count(l).unwrap(), expect, "window {l} at W={w}");
            assert_eq!(plan.local_windows(l).unwrap().len(), l2 * md.d);
        }
    }
    println!("PASS every window holds W·κ·L2·z variable nodes except trailing ones");
}

// --------------------------------------------------- 7: latency bound --

#[test]
fn latency_bound_holds_for_all_legal_sweeps() {
    let mut checked = 0u64;
    for m in 0..=3usize {
        for l in (m + 1).max(1)..=12 {
            for w in (m + 1)..=l {
                for (t_rec, t_dec) in [(1.0, 1.0), (0.5, 2.0), (3.0, 0.25), (0.0, 5.0)] {
                    let est = latency_estimate(w, m, l, t_rec, t_dec).unwrap();
                    let f = (w + m) as f64 / l as f64;
                    assert!(
                        est.window_bound <= f * (t_rec + t_dec) + 1e-12,
                        "bound violated at W={w} m={m} L={l} ({t_rec}, {t_dec})"
                    );
                    assert!((est.window_bound - (f * t_rec + w as f64 / l as f64 * t_dec)).abs() < 1e-12);
                    assert!((est.reduction - f).abs() < 1e-12);
                    checked += 1;
                }
            }
        }
    }
    println!("PASS latency bound holds over {checked} legal parameter combinations");
}

// ----------------------------------------------------- auxiliary checks --

#[test]
fn assembled_matrices_back_every_count() {
    // The counting engine's numbers describe the same matrices the decoder
    // consumes: spot-check dimensions and column weights of one coupled
    // assembly per family.
    let cases = [("m2", 3usize), ("m4", 4), ("m7", 3)];
    let reg = CodeRegistry::builtin();
    for (map, l2) in cases {
        let fixture = reg.map(map).unwrap();
        let spec = reg.map_constituent(fixture).unwrap();
        let md = fixture.mapping_set();
        let h = spec.assemble_md(&md).unwrap();
        assert_eq!(h.cols(), l2 * spec.n());
        assert_eq!(h.rows(), l2 * spec.n_rows());
        assert_eq!(h.nnz(), l2 * spec.block.gamma * spec.block.kappa * spec.block.z as usize * spec.l);
        for c in 0..h.cols() {
            assert_eq!(h.col_weight(c), spec.block.gamma, "column {c} of {map}");
        }
        println!("PASS {map}: {}×{} assembly, uniform column weight {}", h.rows(), h.cols(), spec.block.gamma);
    }
    let _ = SparseBinaryMatrix::from_entries(1, 1, &[(0, 0)]).unwrap();
}
