//! Exhaustive diagnostic sweep of the small search space over the frozen
//! 32-slide cohort: objective landscape, local maxima, greedy reachability,
//! gate margins along the canonical improvement path, and strategy-arm
//! cost shape. Run with --release for comfort; prints a full report.

use std::collections::{HashMap, HashSet, VecDeque};

use bahop_core::cohort::{generate, Cohort, CohortConfig};
use bahop_core::oracle::{cohort_thumbnails, evaluate, segment_cohort, EvalCache, ScorerKind};
use bahop_core::optimize::{by_name, OptimizeSetup};
use bahop_core::params::{default_start, ParamSpace, PreprocParams};
use bahop_core::similarity::set_psnr;

fn wrong_slides(cohort: &Cohort, p: &PreprocParams, cache: &mut EvalCache) -> Vec<String> {
    let eval = evaluate(cohort, p, ScorerKind::PalePenalized, cache).unwrap();
    eval.slides
        .iter()
        .filter(|s| s.predicted != s.label)
        .map(|s| format!("{}:{}", s.slide, cohort.slides[s.slide as usize].name))
        .collect()
}

fn main() {
    let config = CohortConfig { seed: 1, slides: 32, ..CohortConfig::default() };
    let cohort = generate(&config).unwrap();
    let space = ParamSpace::small_space();
    let mut cache = EvalCache::new();
    let start = space.snap(&default_start());

    // --- exhaustive sweep ------------------------------------------------
    let mut objective: HashMap<String, f64> = HashMap::new();
    let mut patches: HashMap<String, u64> = HashMap::new();
    for p in space.enumerate() {
        let eval = evaluate(&cohort, &p, ScorerKind::PalePenalized, &mut cache).unwrap();
        objective.insert(p.canonical_key(), eval.objective);
        patches.insert(p.canonical_key(), eval.patches);
    }
    let best = objective.values().cloned().fold(f64::MIN, f64::max);
    let argmax: Vec<String> = {
        let mut v: Vec<String> = objective
            .iter()
            .filter(|(_, &o)| o == best)
            .map(|(k, _)| k.clone())
            .collect();
        v.sort();
        v
    };
    println!("space size: {}", space.len());
    println!("start {} objective {:.6}", start.canonical_key(), objective[&start.canonical_key()]);
    println!("best objective {:.6} ({} configs)", best, argmax.len());
    for k in &argmax {
        println!("  argmax {}", k);
    }

    // --- strict local maxima ----------------------------------------------
    let mut maxima: Vec<(String, f64)> = Vec::new();
    for p in space.enumerate() {
        let o = objective[&p.canonical_key()];
        let strict = space
            .neighbors(&p)
            .unwrap()
            .iter()
            .all(|n| objective[&n.canonical_key()] < o);
        if strict {
            maxima.push((p.canonical_key(), o));
        }
    }
    maxima.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    println!("strict local maxima: {}", maxima.len());
    for (k, o) in maxima.iter().take(12) {
        println!("  max {} objective {:.6}", k, o);
    }

    // --- greedy reachability ----------------------------------------------
    // BFS over single-axis moves that strictly improve the objective; a
    // terminal is a state with no improving neighbor. This is the set of
    // hill-climb outcomes over every possible proposal order.
    let mut seen: HashSet<String> = HashSet::new();
    let mut queue: VecDeque<PreprocParams> = VecDeque::new();
    let mut terminals: HashSet<String> = HashSet::new();
    seen.insert(start.canonical_key());
    queue.push_back(start);
    while let Some(p) = queue.pop_front() {
        let o = objective[&p.canonical_key()];
        let mut improving = false;
        for n in space.neighbors(&p).unwrap() {
            if objective[&n.canonical_key()] > o {
                improving = true;
                if seen.insert(n.canonical_key()) {
                    queue.push_back(n);
                }
            }
        }
        if !improving {
            terminals.insert(p.canonical_key());
        }
    }
    let mut terminals: Vec<String> = terminals.into_iter().collect();
    terminals.sort();
    println!("greedy-reachable states: {}", seen.len());
    println!("greedy terminals: {}", terminals.len());
    for t in &terminals {
        println!("  terminal {} objective {:.6}", t, objective[t]);
    }

    // --- wrongness at the landmarks ----------------------------------------
    for key in ["8:7:4:80:16:8", "11:3:2:40:8:8", "13:3:2:40:8:8", "12:3:2:40:8:8"] {
        let p = PreprocParams::from_key(key).unwrap();
        println!(
            "wrong at {} (objective {:.6}, patches {}): {:?}",
            key,
            objective[key],
            patches[key],
            wrong_slides(&cohort, &p, &mut cache)
        );
    }

    // --- gate margins along the canonical path ------------------------------
    let path = [
        "8:7:4:80:16:8",
        "9:7:4:80:16:8",
        "10:7:4:80:16:8",
        "11:7:4:80:16:8",
        "11:7:4:40:16:8",
        "11:5:4:40:16:8",
        "11:3:4:40:16:8",
        "11:3:3:40:16:8",
        "11:3:2:40:16:8",
        "11:3:2:40:8:8",
    ];
    let thumbs = |p: &PreprocParams, cache: &mut EvalCache| {
        let masks = segment_cohort(&cohort, p, cache).unwrap();
        cohort_thumbnails(&cohort, &masks).unwrap()
    };
    println!("canonical path (each edge gated against the previous state):");
    for w in path.windows(2) {
        let a = PreprocParams::from_key(w[0]).unwrap();
        let b = PreprocParams::from_key(w[1]).unwrap();
        let psnr = set_psnr(&thumbs(&a, &mut cache), &thumbs(&b, &mut cache)).unwrap();
        println!(
            "  {} -> {}: psnr {} objective {:.6} -> {:.6}",
            w[0],
            w[1],
            psnr.to_db_string(),
            objective[w[0]],
            objective[w[1]]
        );
    }
    // Calibration probes from the snapped start (threshold axis +-1 step).
    let probe_lo = PreprocParams::from_key("7:7:4:80:16:8").unwrap();
    let probe_hi = PreprocParams::from_key("9:7:4:80:16:8").unwrap();
    let t_start = thumbs(&PreprocParams::from_key(path[0]).unwrap(), &mut cache);
    println!(
        "tau probes: lo {} hi {}",
        set_psnr(&thumbs(&probe_lo, &mut cache), &t_start).unwrap().to_db_string(),
        set_psnr(&thumbs(&probe_hi, &mut cache), &t_start).unwrap().to_db_string()
    );
    // Heavy moves off the optimum that the gate should reject, plus the
    // legal-but-worse moves it should pass.
    let c_star = PreprocParams::from_key("11:3:2:40:8:8").unwrap();
    let t_star = thumbs(&c_star, &mut cache);
    for key in [
        "12:3:2:40:8:8",
        "11:3:2:40:8:0",
        "10:3:2:40:8:8",
        "11:3:2:80:8:8",
        "11:5:2:40:8:8",
        "11:3:3:40:8:8",
        "11:3:2:40:16:8",
        "11:3:2:40:4:8",
    ] {
        let p = PreprocParams::from_key(key).unwrap();
        let psnr = set_psnr(&thumbs(&p, &mut cache), &t_star).unwrap();
        println!("  from optimum -> {}: psnr {} objective {:.6}", key, psnr.to_db_string(), objective[key]);
    }

    // --- strategy arms -------------------------------------------------------
    let run = |name: &str, seed: u64, budget: u32, cache: &mut EvalCache| {
        let setup = OptimizeSetup {
            cohort: &cohort,
            space: ParamSpace::small_space(),
            start: default_start(),
            seed,
            budget,
            scorer: ScorerKind::PalePenalized,
        };
        by_name(name).unwrap().run(&setup, cache).unwrap()
    };
    let mut hits = 0;
    for seed in 1..=10u64 {
        let report = run("bahop", seed, 100, &mut cache);
        let summary = report.ledger.summary().unwrap().clone();
        let hit = (report.best_objective - best).abs() <= 0.01;
        hits += hit as u32;
        println!(
            "bahop seed {:2}: best {} {:.6} evals {} gate_skips {} dup_skips {} hit {}",
            seed,
            report.best_params.canonical_key(),
            report.best_objective,
            summary.expensive_evals,
            summary.gate_skips,
            summary.duplicate_skips,
            hit
        );
    }
    println!("bahop hit rate: {}/10", hits);
    for name in ["bahop", "bahop-walk", "bahop-nogate"] {
        let report = run(name, 1, 100, &mut cache);
        let s = report.ledger.summary().unwrap();
        println!(
            "arm {:12} evals {:3} gate_skips {:3} dup_skips {:3} latency {:.4} best {:.6}",
            name,
            s.expensive_evals,
            s.gate_skips,
            s.duplicate_skips,
            s.total_sim_latency_minutes,
            s.best_objective
        );
    }
    let grid = run("grid", 1, space.len() as u32, &mut cache);
    let gs = grid.ledger.summary().unwrap();
    println!(
        "arm {:12} evals {:3} latency {:.4} best {:.6}",
        "grid",
        gs.expensive_evals,
        gs.total_sim_latency_minutes,
        gs.best_objective
    );
}
