//! End-to-end acceptance checks. Runs without the libtest harness so that
//! every criterion prints one PASS/FAIL line; positional arguments that are
//! criterion numbers restrict the run.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use itertools::Itertools;
use num_rational::BigRational;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use teamduel::detalg::{
    compare, find_condorcet_additive, find_condorcet_general, new_cut, reduce_players, uncover, CompareOutcome,
};
use teamduel::harness::{declared_duel_budget, run_experiment, Algorithm, ExperimentConfig, InstanceSource};
use teamduel::model::{
    all_teams, check_additive_representable, generate_instance, is_condorcet_winning, validate_consistency,
    verify_condorcet, AdditivityCertificate, GeneratorSpec, GroundTruthOrder, Instance, Noise, OrderSpec, Player,
    PlayerSet, Team, DEFAULT_COMPARISON_CAP,
};
use teamduel::oracle::{AdversaryOracle, AmplifiedOracle, DeterministicOracle, DuelOracle, StochasticOracle};
use teamduel::reduction::{identify_top_k, singles_duel, DEFAULT_SAMPLE_BUDGET};
use teamduel::witness::{
    deducible_bruteforce, deducible_by_order_enumeration, deducible_by_witness, exact_expectations, gap,
    is_subsets_witness, subsets_candidates, Deduction, GapValue, ObservableRankings, Witness,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

const CAP: u64 = 10_000_000;

fn spec(n: usize, k: usize, order: OrderSpec, noise: Noise) -> GeneratorSpec {
    GeneratorSpec { n, k, order, noise }
}

fn additive_instance(n: usize, k: usize, noise: Noise, seed: u64) -> Instance {
    generate_instance(&spec(n, k, OrderSpec::Additive { scale: 1.0 }, noise), seed).unwrap()
}

fn additive_order(n: usize, k: usize, seed: u64) -> GroundTruthOrder {
    additive_instance(n, k, Noise::Deterministic, seed).order().clone()
}

fn value(order: &GroundTruthOrder, set: PlayerSet) -> f64 {
    let v = order.values().unwrap();
    set.iter().map(|p| v[p.index()]).sum()
}

fn choose(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn ceil_log2(x: usize) -> u64 {
    let mut bits = 0;
    while (1usize << bits) < x {
        bits += 1;
    }
    bits
}

fn pairs(n: usize) -> impl Iterator<Item = (Player, Player)> {
    (1..=n).tuple_combinations().map(|(a, b)| (Player::new(a), Player::new(b)))
}

/// Sign of `E[X]` read as a deduction.
fn sign_as_deduction(e_x: &GapValue) -> Deduction {
    match e_x.signum() {
        std::cmp::Ordering::Greater => Deduction::ABetter,
        std::cmp::Ordering::Less => Deduction::BBetter,
        std::cmp::Ordering::Equal => Deduction::Undeducible,
    }
}

fn witness_characterization() -> Outcome {
    let teams: Vec<Team> = all_teams(4, 2).collect();
    let mut consistent = 0;
    let mut checked = 0;
    for ranked in teams.iter().copied().permutations(teams.len()) {
        let order = GroundTruthOrder::explicit(4, 2, ranked).unwrap();
        if validate_consistency(&order, CAP).unwrap().is_some() {
            continue;
        }
        consistent += 1;
        let inst = Instance::deterministic(order.clone());
        for (a, b) in pairs(4) {
            let by_witness = deducible_by_witness(&inst, a, b, CAP).unwrap();
            let brute = deducible_bruteforce(&order, a, b).unwrap();
            let listed = deducible_by_order_enumeration(&order, a, b).unwrap();
            ensure!(
                by_witness == brute && brute == listed,
                "n=4 order {order:?} pair ({a},{b}): {by_witness} / {brute} / {listed}"
            );
            checked += 1;
        }
    }
    ensure!(consistent > 0, "no consistent n=4 order found");

    let kinds = [OrderSpec::Explicit, OrderSpec::Additive { scale: 1.0 }, OrderSpec::Lexicographic { shuffled: true }];
    let mut instances = 0;
    for seed in 0..240u64 {
        let kind = kinds[(seed % 3) as usize].clone();
        let inst = generate_instance(&spec(5, 2, kind, Noise::Deterministic), seed).unwrap();
        let rankings = ObservableRankings::new(inst.order()).unwrap();
        for (a, b) in pairs(5) {
            let by_witness = deducible_by_witness(&inst, a, b, CAP).unwrap();
            ensure!(by_witness == rankings.deduce(a, b), "n=5 seed {seed} pair ({a},{b})");
            checked += 1;
        }
        instances += 1;
    }
    Ok(format!("{consistent} consistent n=4 orders, {instances} n=5 instances, {checked} pairs agree"))
}

fn expectation_structure() -> Outcome {
    let shapes = [(6, 2), (8, 2), (9, 2), (9, 3)];
    let noises = [Noise::Deterministic, Noise::Uniform { p: 0.7 }, Noise::Logistic { beta: 3.0 }];
    let mut cases = Vec::new();
    for seed in 0..9u64 {
        for &(n, k) in &shapes {
            for (i, noise) in noises.iter().enumerate() {
                cases.push((n, k, *noise, seed * 10 + i as u64));
            }
        }
    }
    cases.push((9, 3, Noise::Uniform { p: 0.6 }, 1000));
    let failures: Vec<String> =
        cases.par_iter().filter_map(|&(n, k, noise, seed)| expectation_case(n, k, noise, seed).err()).collect();
    ensure!(failures.is_empty(), "{}", failures[0]);
    Ok(format!("{} instances: sign, transitivity and gap ordering hold", cases.len()))
}

fn expectation_case(n: usize, k: usize, noise: Noise, seed: u64) -> Result<(), String> {
    let inst = additive_instance(n, k, noise, seed);
    let ranking = inst.order().induced_ranking();
    let mut e = vec![vec![None; n]; n];
    for (i, j) in (0..n).tuple_combinations() {
        let (a, b) = (ranking[i], ranking[j]);
        let report = exact_expectations(&inst, a, b, CAP).map_err(|e| e.to_string())?;
        let deduced = deducible_by_witness(&inst, a, b, CAP).map_err(|e| e.to_string())?;
        ensure!(
            sign_as_deduction(&report.e_x) == deduced,
            "seed {seed} n={n} k={k}: E[X] = {} but deduction is {deduced}",
            report.e_x
        );
        e[i][j] = Some(report.e_x);
    }
    let at = |i: usize, j: usize| e[i][j].as_ref().unwrap();
    for (i, j, l) in (0..n).tuple_combinations() {
        let outer = at(i, l);
        ensure!(
            outer.compare(at(i, j)).is_ge() && outer.compare(at(j, l)).is_ge(),
            "seed {seed} n={n} k={k}: transitivity fails at ranks ({i},{j},{l})"
        );
    }
    let delta = gap(&inst, CAP).map_err(|e| e.to_string())?;
    for i in 0..k {
        for j in k..n {
            ensure!(at(i, j).compare(&delta).is_ge(), "seed {seed} n={n} k={k}: E[X] below the gap at ({i},{j})");
        }
    }
    Ok(())
}

fn reduction_unbiased() -> Outcome {
    let inst = additive_instance(8, 2, Noise::Logistic { beta: 2.0 }, 3);
    let r = inst.order().induced_ranking();
    let chosen = [(r[0], r[1]), (r[1], r[2]), (r[2], r[5]), (r[6], r[3]), (r[7], r[0])];
    const SAMPLES: u32 = 100_000;
    let tolerance = 3.0 * (0.25 / SAMPLES as f64).sqrt();
    let mut worst: f64 = 0.0;
    for (i, &(a, b)) in chosen.iter().enumerate() {
        let expected = 0.5 + exact_expectations(&inst, a, b, CAP).unwrap().e_x.to_f64();
        let mut oracle = StochasticOracle::new(&inst, 77 + i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(1_000 + i as u64);
        let wins = (0..SAMPLES).filter(|_| singles_duel(&mut oracle, a, b, &mut rng).unwrap()).count();
        let rate = wins as f64 / SAMPLES as f64;
        worst = worst.max((rate - expected).abs());
        ensure!((rate - expected).abs() <= tolerance, "pair ({a},{b}): rate {rate:.5}, expected {expected:.5}");
    }
    Ok(format!("max deviation {worst:.5} <= {tolerance:.5}"))
}

fn top_k_identification() -> Outcome {
    let betas = [4.0, 2.0, 1.0];
    let mut summary = Vec::new();
    let mut points: Vec<(f64, u64)> = Vec::new();
    for &beta in &betas {
        let noise = Noise::Logistic { beta };
        let mut batch = Vec::new();
        for seed in 0u64.. {
            if batch.len() == 20 {
                break;
            }
            ensure!(seed < 2_000, "beta {beta}: fewer than 20 instances with gap >= 0.05");
            let inst = additive_instance(9, 3, noise, seed);
            let delta = gap(&inst, CAP).unwrap().to_f64();
            if delta >= 0.05 {
                batch.push((seed, inst, delta));
            }
        }
        let runs: Vec<(bool, u64, f64)> = batch
            .par_iter()
            .map(|(seed, inst, delta)| {
                let mut oracle = StochasticOracle::new(inst, 9_000 + seed);
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let res = identify_top_k(&mut oracle, 0.1, &mut rng, DEFAULT_SAMPLE_BUDGET).unwrap();
                (res.team == inst.order().top_players(3), res.samples, *delta)
            })
            .collect();
        let hits = runs.iter().filter(|r| r.0).count();
        ensure!(hits >= 18, "beta {beta}: {hits}/20 correct");
        let mean = runs.iter().map(|r| r.1 as f64).sum::<f64>() / runs.len() as f64;
        let mean_gap = runs.iter().map(|r| r.2).sum::<f64>() / runs.len() as f64;
        summary.push(format!("beta {beta}: {hits}/20, gap {mean_gap:.3}, samples {mean:.0}"));
        points.extend(runs.iter().map(|r| (r.2, r.1)));
    }
    let rho = spearman(
        &points.iter().map(|p| -p.0).collect::<Vec<_>>(),
        &points.iter().map(|p| p.1 as f64).collect::<Vec<_>>(),
    );
    ensure!(rho > 0.0, "rank correlation between smaller gap and more samples is {rho:.3}");
    Ok(format!("{}; rank correlation {rho:.3}", summary.join("; ")))
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut r = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        for &t in &idx[i..=j] {
            r[t] = (i + j) as f64 / 2.0;
        }
        i = j + 1;
    }
    r
}

fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let mean = (x.len() - 1) as f64 / 2.0;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mean) * (b - mean)).sum();
    let sx: f64 = rx.iter().map(|a| (a - mean).powi(2)).sum();
    let sy: f64 = ry.iter().map(|b| (b - mean).powi(2)).sum();
    cov / (sx * sy).sqrt()
}

fn uncover_calls() -> Outcome {
    let mut calls = 0;
    let mut max_over = Vec::new();
    for k in [2usize, 4, 8, 16] {
        let n = 2 * k + 2;
        let bound = ceil_log2(k) + 1;
        let mut done = 0;
        let mut most = 0;
        for seed in 0u64.. {
            if done == 250 {
                break;
            }
            let order = additive_order(n, k, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            let mut ids: Vec<Player> = (1..=n).map(Player::new).collect();
            ids.shuffle(&mut rng);
            let (mut a, mut b) = (ids[..k].to_vec(), ids[k..2 * k].to_vec());
            if !order.beats(a.iter().collect(), b.iter().collect()) {
                std::mem::swap(&mut a, &mut b);
            }
            let m = rng.gen_range(1..=k);
            let (a2, b2): (PlayerSet, PlayerSet) = (a[m..].iter().collect(), b[m..].iter().collect());
            let (a1, b1) = (&a[..m], &b[..m]);
            let (a1_set, b1_set): (PlayerSet, PlayerSet) = (a1.iter().collect(), b1.iter().collect());
            if !order.beats(a1_set | b2, b1_set | a2) {
                continue;
            }
            let mut oracle = DeterministicOracle::new(&order);
            let res = uncover(&mut oracle, a1, b1, a2, b2).map_err(|e| format!("k={k} seed {seed}: {e}"))?;
            ensure!(res.duels == oracle.duel_count(), "k={k} seed {seed}: duel count mismatch");
            ensure!(res.duels <= bound, "k={k} seed {seed}: {} duels > {bound}", res.duels);
            ensure!(a1_set.contains(res.a) && b1_set.contains(res.b), "k={k} seed {seed}: pair outside A1 x B1");
            let w = res.witness;
            ensure!(
                order.beats(w.s.with(res.a), w.s_prime.with(res.b))
                    && order.beats(w.s_prime.with(res.a), w.s.with(res.b)),
                "k={k} seed {seed}: witness does not re-verify"
            );
            ensure!(Witness::Subsets(w).audit(&oracle, res.a, res.b) == Some(true), "k={k} seed {seed}: audit failed");
            most = most.max(res.duels);
            done += 1;
            calls += 1;
        }
        max_over.push(format!("k={k}: max {most} <= {bound}"));
    }
    Ok(format!("{calls} calls; {}", max_over.join(", ")))
}

fn player_reduction() -> Outcome {
    let mut runs = 0;
    let mut stats = Vec::new();
    for n in [20usize, 40, 80] {
        for k in [2usize, 3, 5] {
            let bound = 2 * (k * n) as u64 * (ceil_log2(k) + 2);
            let results: Vec<Result<(usize, u64), String>> = (0..100u64)
                .into_par_iter()
                .map(|seed| {
                    let order = additive_order(n, k, seed);
                    let mut oracle = DeterministicOracle::new(&order);
                    let red = reduce_players(&mut oracle).map_err(|e| format!("n={n} k={k} seed {seed}: {e}"))?;
                    ensure!(red.players.len() <= 6 * k - 2, "n={n} k={k} seed {seed}: |R| = {}", red.players.len());
                    ensure!(
                        order.top_players(2 * k).is_subset(red.players),
                        "n={n} k={k} seed {seed}: lost a top player"
                    );
                    ensure!(
                        oracle.duel_count() <= bound,
                        "n={n} k={k} seed {seed}: {} duels > {bound}",
                        oracle.duel_count()
                    );
                    Ok((red.players.len(), oracle.duel_count()))
                })
                .collect();
            let results: Vec<(usize, u64)> = results.into_iter().collect::<Result<_, _>>()?;
            runs += results.len();
            let max_r = results.iter().map(|r| r.0).max().unwrap();
            let max_d = results.iter().map(|r| r.1).max().unwrap();
            stats.push(format!("({n},{k}) |R|<={max_r} duels<={max_d}/{bound}"));
        }
    }
    Ok(format!("{runs} runs; {}", stats.join(", ")))
}

fn cut_and_compare() -> Outcome {
    let mut cuts = 0;
    let mut max_cut = 0;
    for seed in 0u64.. {
        if cuts == 500 {
            break;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.gen_range(2..=3);
        let n = rng.gen_range(2 * k + 2..=12);
        let inst = additive_instance(n, k, Noise::Deterministic, seed);
        let order = inst.order();
        let ids: Vec<Player> = (1..=n).map(Player::new).collect();
        let pair: Vec<Player> = ids.choose_multiple(&mut rng, 2).copied().collect();
        let (a, b) = if order.player_beats(pair[0], pair[1]) { (pair[0], pair[1]) } else { (pair[1], pair[0]) };
        let Some(witness) = teamduel::witness::find_witness(&inst, a, b, CAP).unwrap() else {
            continue;
        };
        let r = PlayerSet::full(n);
        let mut oracle = DeterministicOracle::new(order);
        let (upper, lower) = new_cut(&mut oracle, r, a, b, witness).map_err(|e| format!("new_cut seed {seed}: {e}"))?;
        ensure!(upper.is_disjoint(lower) && (upper | lower) == r, "new_cut seed {seed}: not a partition");
        ensure!(upper.contains(a) && lower.contains(b), "new_cut seed {seed}: a or b on the wrong side");
        for u in upper.iter() {
            for l in lower.iter() {
                ensure!(order.player_beats(u, l), "new_cut seed {seed}: {u} placed above {l}");
            }
        }
        let bound = 4 * (n * n) as u64;
        ensure!(oracle.duel_count() <= bound, "new_cut seed {seed}: {} duels", oracle.duel_count());
        max_cut = max_cut.max(oracle.duel_count());
        cuts += 1;
    }

    let (mut proven, mut refuted) = (0, 0);
    for seed in 0u64.. {
        if proven + refuted == 500 {
            break;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc0ffee);
        let (n, k) = (10, 3);
        let inst = additive_instance(n, k, Noise::Deterministic, seed);
        let order = inst.order();
        let ids: Vec<Player> = (1..=n).map(Player::new).collect();
        let pair: Vec<Player> = ids.choose_multiple(&mut rng, 2).copied().collect();
        let (a, b) = if order.player_beats(pair[0], pair[1]) { (pair[0], pair[1]) } else { (pair[1], pair[0]) };
        let found: Vec<_> =
            subsets_candidates(n, k, a, b).unwrap().filter(|c| is_subsets_witness(&inst, a, b, c).unwrap()).collect();
        let Some(&w) = found.choose(&mut rng) else {
            continue;
        };
        let m = rng.gen_range(1..k);
        let c: PlayerSet = w.s.iter().collect::<Vec<_>>().choose_multiple(&mut rng, m).copied().collect();
        let d: PlayerSet = w.s_prime.iter().collect::<Vec<_>>().choose_multiple(&mut rng, m).copied().collect();
        let mut oracle = DeterministicOracle::new(order);
        let outcome = compare(&mut oracle, (a, b), w, c, d).map_err(|e| format!("compare seed {seed}: {e}"))?;
        ensure!(oracle.duel_count() == 2, "compare seed {seed}: {} duels", oracle.duel_count());
        match outcome {
            CompareOutcome::Proven => {
                let margin = value(order, PlayerSet::singleton(a)) - value(order, PlayerSet::singleton(b));
                ensure!(margin > (value(order, c) - value(order, d)).abs(), "compare seed {seed}: unsound proof");
                proven += 1;
            }
            CompareOutcome::Refuted(input) => {
                let res = input.run(&mut oracle).map_err(|e| format!("compare seed {seed}: follow-up {e}"))?;
                ensure!(
                    Witness::Subsets(res.witness).audit(&oracle, res.a, res.b) == Some(true),
                    "compare seed {seed}: follow-up witness fails"
                );
                refuted += 1;
            }
        }
    }
    ensure!(proven > 0 && refuted > 0, "compare never took one branch ({proven} proven, {refuted} refuted)");
    Ok(format!("500 cuts (max {max_cut} duels); compare {proven} proven, {refuted} refuted, 2 duels each"))
}

/// Rounds a fitted constant up to the next multiple of 1/2.
fn round_up_half(x: f64) -> f64 {
    (2.0 * x).ceil() / 2.0
}

fn ceiling((c1, c2): (f64, f64), n: usize, k: usize) -> f64 {
    let (n, k) = (n as f64, k as f64);
    c1 * n * k * k.log2() + c2 * k.powi(5)
}

/// Reduction and search duels for every seed; fails on an unverified answer.
fn additive_runs(n: usize, k: usize, seeds: u64) -> Result<Vec<(u64, u64)>, String> {
    (0..seeds)
        .into_par_iter()
        .map(|seed| {
            let order = additive_order(n, k, 500 + seed);
            let mut oracle = DeterministicOracle::new(&order);
            let cert = find_condorcet_additive(&mut oracle).map_err(|e| format!("({n},{k}) seed {seed}: {e}"))?;
            let ok = verify_condorcet(&order, cert.team, DEFAULT_COMPARISON_CAP).map_err(|e| e.to_string())?;
            ensure!(ok, "({n},{k}) seed {seed}: {} is not Condorcet winning", cert.team);
            ensure!(cert.duels == oracle.duel_count(), "({n},{k}) seed {seed}: duel count mismatch");
            Ok((cert.reduction_duels, cert.duels - cert.reduction_duels))
        })
        .collect()
}

fn additive_end_to_end() -> Outcome {
    let fit_grid = [(20, 2), (30, 2), (20, 3), (30, 3)];
    let check_grid = [(50, 4), (50, 5)];
    let mut fit_runs = Vec::new();
    for (n, k) in fit_grid {
        fit_runs.push((n, k, additive_runs(n, k, 100)?));
    }
    // Reduction duels scale with n·k·log2(k), the search on the reduced set with k^5.
    let (mut c1, mut c2): (f64, f64) = (0.0, 0.0);
    for (n, k, runs) in &fit_runs {
        let nk = (n * k) as f64 * (*k as f64).log2();
        c1 = runs.iter().map(|r| r.0 as f64 / nk).fold(c1, f64::max);
        c2 = runs.iter().map(|r| r.1 as f64 / (*k as f64).powi(5)).fold(c2, f64::max);
    }
    let constants = (round_up_half(c1), round_up_half(c2));
    let mut lines = Vec::new();
    let mut all = fit_runs;
    for (n, k) in check_grid {
        all.push((n, k, additive_runs(n, k, 50)?));
    }
    for (n, k, runs) in &all {
        let worst = runs.iter().map(|r| r.0 + r.1).max().unwrap();
        let cap = ceiling(constants, *n, *k);
        ensure!(
            worst as f64 <= cap,
            "({n},{k}): {worst} duels > ceiling {cap:.0} with c1={}, c2={}",
            constants.0,
            constants.1
        );
        lines.push(format!("({n},{k}) max {worst}/{cap:.0}"));
    }
    Ok(format!(
        "all {} verified; fit on k<=3 gives c1={}, c2={}; {}",
        all.iter().map(|r| r.2.len()).sum::<usize>(),
        constants.0,
        constants.1,
        lines.join(", ")
    ))
}

fn general_end_to_end() -> Outcome {
    let mut cases = Vec::new();
    let small = [(8, 2), (9, 2), (10, 2), (9, 3)];
    let mut seed = 0u64;
    while cases.len() < 25 {
        let (n, k) = small[cases.len() % small.len()];
        let inst = generate_instance(&spec(n, k, OrderSpec::Explicit, Noise::Deterministic), seed).unwrap();
        seed += 1;
        if !check_additive_representable(inst.order()).unwrap().is_representable() {
            cases.push(inst);
        }
    }
    for i in 0..25u64 {
        let (n, k) = (12 + (i as usize % 9), 2 + (i as usize % 2));
        cases.push(generate_instance(&spec(n, k, OrderSpec::Explicit, Noise::Deterministic), 100 + i).unwrap());
    }
    let results: Vec<Result<usize, String>> = cases
        .par_iter()
        .map(|inst| {
            let (n, k) = (inst.n(), inst.k());
            let mut oracle = DeterministicOracle::new(inst.order());
            let cert = find_condorcet_general(&mut oracle).map_err(|e| format!("n={n} k={k}: {e}"))?;
            let ok = is_condorcet_winning(inst.order(), cert.team, CAP).map_err(|e| e.to_string())?;
            ensure!(ok, "n={n} k={k} seed {}: {} is not Condorcet winning", inst.seed(), cert.team);
            for round in &cert.rounds {
                let expected = choose((round.v_size - k) as u64, k as u64);
                ensure!(
                    round.opponents_total == expected,
                    "n={n} k={k}: {} opponents, expected {expected}",
                    round.opponents_total
                );
                if round.won {
                    ensure!(round.opponents_tested == expected, "n={n} k={k}: winning round skipped opponents");
                }
            }
            ensure!(cert.rounds.last().is_some_and(|r| r.won), "n={n} k={k}: last round was not a win");
            Ok(cert.rounds.len())
        })
        .collect();
    let rounds: Vec<usize> = results.into_iter().collect::<Result<_, _>>()?;
    Ok(format!(
        "{} explicit orders (25 certified non-additive), {} rounds, opponent counts exact",
        cases.len(),
        rounds.iter().sum::<usize>()
    ))
}

fn adversary_lower_bound() -> Outcome {
    let mut lines = Vec::new();
    for (n, k) in [(20usize, 2usize), (30, 3)] {
        for general in [false, true] {
            let mut adversary = AdversaryOracle::new(n, k);
            let cert =
                if general { find_condorcet_general(&mut adversary) } else { find_condorcet_additive(&mut adversary) }
                    .map_err(|e| format!("({n},{k}): {e}"))?;
            let duels = adversary.duel_count();
            ensure!(duels >= (n - 2 * k) as u64, "({n},{k}): only {duels} duels");
            ensure!(adversary.replay_consistent(), "({n},{k}): answers do not replay");
            let order = adversary.completed_order();
            ensure!(verify_condorcet(&order, cert.team, DEFAULT_COMPARISON_CAP).unwrap(), "({n},{k}): answer loses");
            lines.push(format!("({n},{k}) {} {duels}", if general { "general" } else { "additive" }));
        }
    }
    Ok(format!("duels >= n-2k and consistent replay: {}", lines.join(", ")))
}

fn repetitions_formula(m: u64, delta: f64, theta: f64) -> u64 {
    ((m as f64 / delta).ln() / (2.0 * theta * theta)).ceil() as u64
}

fn amplification() -> Outcome {
    let (n, k, delta) = (8, 2, 0.05);
    let noise = Noise::Uniform { p: 0.6 };
    let mut config = ExperimentConfig::new(
        InstanceSource::Generate(spec(n, k, OrderSpec::Additive { scale: 1.0 }, noise)),
        Algorithm::Additive,
        100,
    );
    config.delta = delta;
    config.seed_base = 11;
    let report = run_experiment(&config).map_err(|e| e.to_string())?;
    let successes = report.summary.successes;
    ensure!(successes >= 95, "{successes}/100 successes");

    let inst = additive_instance(n, k, noise, 3);
    let theta = inst.uniform_margin().unwrap();
    ensure!((theta - 0.1).abs() < 1e-12, "margin {theta}");
    let m = declared_duel_budget(n, k);
    let expected = repetitions_formula(m, delta, theta);
    let mut oracle =
        AmplifiedOracle::new(StochasticOracle::new(&inst, 5), theta, delta, m).map_err(|e| e.to_string())?;
    ensure!(oracle.repetitions() == expected, "repetitions {} != {expected}", oracle.repetitions());
    let cert = find_condorcet_additive(&mut oracle).map_err(|e| e.to_string())?;
    let draws = oracle.inner().duel_count();
    ensure!(draws == expected * cert.duels, "{draws} draws for {} duels at {expected} each", cert.duels);
    Ok(format!("{successes}/100 successes; m={m}, {expected} repetitions per duel"))
}

fn additive_representability() -> Outcome {
    let lex = GroundTruthOrder::lexicographic(4, 2, (1..=4).map(Player::new).collect()).unwrap();
    let cert = check_additive_representable(&lex).unwrap();
    let AdditivityCertificate::Representable { values } = &cert else {
        return Err("lexicographic n=4 order reported non-representable".into());
    };
    let sum = |t: Team| t.iter().fold(BigRational::zero(), |acc, p| acc + &values[p.index()]);
    let teams = lex.sorted_teams(CAP).unwrap();
    let mut relations = 0;
    for (i, j) in (0..teams.len()).tuple_combinations() {
        ensure!(sum(teams[i]) > sum(teams[j]), "values break {} > {}", teams[i], teams[j]);
        relations += 1;
    }
    ensure!(relations == 15, "{relations} relations");
    ensure!(cert.verify(&lex).unwrap(), "certificate does not verify");

    let t = |a: usize, b: usize| PlayerSet::from_ids([a, b]);
    let relations3 = [(t(1, 2), t(3, 4)), (t(3, 5), t(1, 6)), (t(4, 6), t(2, 5))];
    let ranking: Vec<Player> = [1, 3, 4, 2, 5, 6].into_iter().map(Player::new).collect();
    let order =
        extend_with_relations(6, 2, &ranking, &relations3).ok_or("dominance and the three relations form a cycle")?;
    ensure!(validate_consistency(&order, CAP).unwrap().is_none(), "construction order is not consistent");
    ensure!(relations3.iter().all(|&(x, y)| order.beats(x, y)), "construction order misses a relation");
    let cert = check_additive_representable(&order).unwrap();
    let AdditivityCertificate::NotRepresentable { better, worse } = &cert else {
        return Err("three-relation construction reported representable".into());
    };
    let mut balance = vec![0i64; 6];
    for (x, y) in better.iter().zip(worse) {
        ensure!(order.beats(*x, *y), "certificate uses {x} > {y}, which does not hold");
        x.iter().for_each(|p| balance[p.index()] += 1);
        y.iter().for_each(|p| balance[p.index()] -= 1);
    }
    ensure!(!better.is_empty() && balance.iter().all(|&c| c == 0), "multiplicities unbalanced: {balance:?}");
    ensure!(cert.verify(&order).unwrap(), "certificate does not verify");
    let counts = better.iter().copied().zip(worse.iter().copied()).counts();
    ensure!(counts.values().all_equal(), "unequal multiplicities {counts:?}");
    let canonical = AdditivityCertificate::NotRepresentable {
        better: relations3.iter().map(|r| r.0).collect(),
        worse: relations3.iter().map(|r| r.1).collect(),
    };
    ensure!(canonical.verify(&order).unwrap(), "the three relations do not form a certificate");
    Ok(format!(
        "15 relations re-verified; non-representable via {} relations of multiplicity {}, three-relation certificate verifies",
        counts.len(),
        counts.values().next().unwrap()
    ))
}

/// Smallest-rank-first linear extension of componentwise dominance under
/// `ranking` together with `extra` relations. `None` on a cycle.
fn extend_with_relations(n: usize, k: usize, ranking: &[Player], extra: &[(Team, Team)]) -> Option<GroundTruthOrder> {
    let teams: Vec<Team> = all_teams(n, k).collect();
    let pos = |p: Player| ranking.iter().position(|&q| q == p).unwrap();
    let key = |t: Team| -> Vec<usize> { t.iter().map(pos).sorted().collect() };
    let dominates = |x: Team, y: Team| x != y && key(x).iter().zip(key(y)).all(|(a, b)| *a <= b);
    let index = |t: Team| teams.iter().position(|&u| u == t).unwrap();
    let mut edges = vec![Vec::new(); teams.len()];
    for (i, j) in (0..teams.len()).cartesian_product(0..teams.len()) {
        if dominates(teams[i], teams[j]) {
            edges[i].push(j);
        }
    }
    for &(x, y) in extra {
        edges[index(x)].push(index(y));
    }
    let mut indegree = vec![0; teams.len()];
    edges.iter().flatten().for_each(|&j| indegree[j] += 1);
    let mut ranked = Vec::new();
    let mut ready: Vec<usize> = (0..teams.len()).filter(|&i| indegree[i] == 0).collect();
    while let Some(&i) = ready.iter().min_by_key(|&&i| key(teams[i])) {
        ready.retain(|&j| j != i);
        ranked.push(teams[i]);
        for &j in &edges[i] {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                ready.push(j);
            }
        }
    }
    (ranked.len() == teams.len()).then(|| GroundTruthOrder::explicit(n, k, ranked).unwrap())
}

const CRITERIA: [Criterion; 12] = [
    ("witness characterization", witness_characterization),
    ("expectation sign, transitivity and gap", expectation_structure),
    ("singles duel unbiased", reduction_unbiased),
    ("top-k identification", top_k_identification),
    ("uncover", uncover_calls),
    ("player reduction", player_reduction),
    ("new cut and compare", cut_and_compare),
    ("additive end to end", additive_end_to_end),
    ("general end to end", general_end_to_end),
    ("adversary lower bound", adversary_lower_bound),
    ("amplification", amplification),
    ("additive representability", additive_representability),
];

fn main() -> ExitCode {
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in CRITERIA.iter().enumerate() {
        let id = i + 1;
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|payload| {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {id:>2} {name} ({secs:.1}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {id:>2} {name} ({secs:.1}s): {detail}");
            }
        }
    }
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
