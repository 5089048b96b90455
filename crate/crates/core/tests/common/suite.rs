//! Oracle and exactness checks shared by the integration tests and the
//! acceptance runner. Each returns a short summary on success.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;

use bcv_core::bcv::{
    candidate_loss, make_split, penalty_factor, score_labels, write_surface_csv, BcvConfig, DRule, SplitMode,
};
use bcv_core::graph::{generate_sbm, true_mean_matrix, LabelVector, Membership, SbmSpec, Side};
use bcv_core::harness::{run_experiment, ExperimentConfig, Method, SettingId};
use bcv_core::metrics::{adjusted_rand_index, label_agreement};
use bcv_core::numerics::{kmeans, truncated_svd, KMeansOptions, SvdOptions};
use bcv_core::select;

use super::*;

pub type Check = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Truncated SVD residuals and singular values against the Jacobi oracle, on
/// both the exact and the randomized path.
pub fn svd_vs_oracle(instances: usize, seed: u64) -> Check {
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    for t in 0..instances {
        let m = r.random_range(1..=10);
        let n = r.random_range(1..=10);
        let a = DMatrix::from_fn(m, n, |_, _| r.random_range(-1.0..1.0));
        let k = r.random_range(1..=m.min(n));
        let (_, sigma, _) = jacobi_svd(&a);
        let norm = a.norm().max(f64::MIN_POSITIVE);
        let oracle_residual = sigma[k..].iter().map(|s| s * s).sum::<f64>().sqrt();
        for cutoff in [512, 0] {
            let opts = SvdOptions {
                dense_cutoff: cutoff,
                seed: t as u64,
                ..SvdOptions::default()
            };
            let svd = truncated_svd(&a, k, &opts).map_err(|e| e.to_string())?;
            let residual = (&a - svd.reconstruct()).norm();
            let rel = (residual - oracle_residual).abs() / norm;
            worst = worst.max(rel);
            ensure(rel <= 1e-8, || {
                format!("instance {t} ({m}x{n}, k={k}, cutoff {cutoff}): residual rel err {rel:e}")
            })?;
            for (i, s) in svd.sigma.iter().enumerate() {
                let rel = (s - sigma[i]).abs() / norm;
                ensure(rel <= 1e-8, || format!("instance {t}: sigma[{i}] rel err {rel:e}"))?;
            }
        }
    }
    Ok(format!(
        "{instances} matrices, worst relative residual error {worst:.1e}"
    ))
}

/// k-means objective (50 restarts) equals the exhaustive-partition minimum.
pub fn kmeans_vs_exhaustive(instances: usize, seed: u64) -> Check {
    let mut r = rng(seed);
    for t in 0..instances {
        let m = r.random_range(1..=8);
        let k = r.random_range(1..=m.min(3));
        let d = r.random_range(1..=3);
        let points: Vec<Vec<f64>> = (0..m)
            .map(|_| {
                (0..d)
                    .map(|_| f64::from(r.random_range(0..6u8)) + r.random_range(0.0..0.5))
                    .collect()
            })
            .collect();
        let mat = DMatrix::from_fn(m, d, |i, j| points[i][j]);
        let got = kmeans(
            &mat,
            k,
            &KMeansOptions {
                restarts: 50,
                seed: t as u64,
                ..KMeansOptions::default()
            },
        )
        .map_err(|e| e.to_string())?
        .objective;
        let want = exhaustive_kmeans(&points, k);
        ensure((got - want).abs() <= 1e-9 * want.max(1.0), || {
            format!("instance {t} (m={m}, k={k}, d={d}): objective {got} vs exhaustive {want}")
        })?;
    }
    Ok(format!("{instances} instances matched"))
}

/// Frontier search without early stopping over a 5x5 box equals independent
/// evaluation of all 25 candidates.
pub fn select_vs_grid(graphs: usize, seed: u64) -> Check {
    let mut r = rng(seed);
    for t in 0..graphs {
        let (n1, n2) = (r.random_range(6..=12), r.random_range(6..=12));
        let g = random_graph(&mut r, n1, n2);
        let cfg = BcvConfig {
            patience: None,
            max_frontier: Some(5),
            seed: t as u64,
            ..BcvConfig::default()
        };
        let res = select(&g, &cfg).map_err(|e| e.to_string())?;
        let (surface, best) = exhaustive_grid(&g, &cfg, 5);
        ensure(res.surface.len() == 25, || {
            format!("graph {t}: {} candidates visited", res.surface.len())
        })?;
        for &(k1, k2, total) in &surface {
            let p = res
                .get(k1, k2)
                .ok_or_else(|| format!("graph {t}: ({k1}, {k2}) not visited"))?;
            ensure(p.total == total, || {
                format!("graph {t}: ({k1}, {k2}) total {} vs {total}", p.total)
            })?;
        }
        ensure((res.k1_hat, res.k2_hat) == best, || {
            format!(
                "graph {t}: selected ({}, {}) vs exhaustive {best:?}",
                res.k1_hat, res.k2_hat
            )
        })?;
    }
    Ok(format!("{graphs} graphs matched"))
}

/// ARI and label agreement against pair counting and permutation search.
pub fn metrics_vs_brute(pairs: usize, seed: u64) -> Check {
    let mut r = rng(seed);
    for t in 0..pairs {
        let n = r.random_range(2..=30);
        let (ka, kb) = (r.random_range(1..=6), r.random_range(1..=6));
        let a = random_labels(&mut r, n, ka);
        let b = random_labels(&mut r, n, kb);
        let la = LabelVector::from_labels(a.clone(), Side::One);
        let lb = LabelVector::from_labels(b.clone(), Side::One);
        let ari = adjusted_rand_index(&la, &lb).map_err(|e| e.to_string())?;
        let want = brute_ari(&a, &b);
        ensure((ari - want).abs() <= 1e-12, || format!("pair {t}: ARI {ari} vs {want}"))?;
        let agr = label_agreement(&la, &lb).map_err(|e| e.to_string())?;
        let want = brute_agreement(&a, &b);
        ensure((agr - want).abs() <= 1e-12, || {
            format!("pair {t}: agreement {agr} vs {want}")
        })?;
    }
    Ok(format!("{pairs} label pairs matched"))
}

fn covering_labels(r: &mut impl Rng, n: usize, k: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..k).chain((k..n).map(|_| r.random_range(0..k))).collect();
    v.shuffle(r);
    v
}

/// `P = Z1 B Z2^T` equals its block factorization.
pub fn block_factorization(models: usize, seed: u64) -> Check {
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    for t in 0..models {
        let k1 = r.random_range(1..=5);
        let k2 = r.random_range(1..=5);
        let n1 = k1 + r.random_range(0..=20);
        let n2 = k2 + r.random_range(0..=20);
        let b = DMatrix::from_fn(k1, k2, |_, _| r.random_range(0.0..1.0));
        let c1 = covering_labels(&mut r, n1, k1);
        let c2 = covering_labels(&mut r, n2, k2);
        let spec = SbmSpec::new(
            b.clone(),
            Membership::Explicit {
                c1: c1.clone(),
                c2: c2.clone(),
            },
        )
        .map_err(|e| e.to_string())?;
        let l1 = LabelVector::new(c1, k1, Side::One).map_err(|e| e.to_string())?;
        let l2 = LabelVector::new(c2, k2, Side::Two).map_err(|e| e.to_string())?;
        let p = true_mean_matrix(&spec, &l1, &l2).map_err(|e| e.to_string())?;
        let err = (p - factorized_mean(&b, &l1, &l2)).amax();
        worst = worst.max(err);
        ensure(err <= 1e-10, || format!("model {t} ({k1}x{k2}): max deviation {err:e}"))?;
    }
    Ok(format!("{models} models, worst deviation {worst:.1e}"))
}

fn planted(seed: u64, n1: usize, n2: usize) -> bcv_core::BipartiteGraph {
    let b = nalgebra::dmatrix![0.6, 0.1, 0.2; 0.15, 0.5, 0.1; 0.1, 0.2, 0.7];
    let spec = SbmSpec::new(
        b,
        Membership::Multinomial {
            pi1: vec![1.0 / 3.0; 3],
            pi2: vec![1.0 / 3.0; 3],
        },
    )
    .unwrap();
    generate_sbm(&spec, n1, n2, seed).unwrap().0
}

/// total = mse + d * lambda with no rounding slack, for single fits and for
/// every point of a selected surface.
pub fn loss_decomposition(seed: u64) -> Check {
    let g = planted(seed, 45, 36);
    let cfg = BcvConfig {
        seed,
        ..BcvConfig::default()
    };
    let lambda = penalty_factor(&g, cfg.c).map_err(|e| e.to_string())?;
    let plan = make_split(g.n1(), g.n2(), cfg.split_mode(), seed).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for k1 in 1..=4 {
        for k2 in 1..=4 {
            for s in [0, 5] {
                let fit = candidate_loss(&g, &plan, s, k1, k2, lambda, &DRule::Product, 10, seed)
                    .map_err(|e| e.to_string())?;
                let d = (k1 * k2) as f64;
                ensure(
                    fit.penalty == d * lambda && fit.total == fit.test_mse + d * lambda,
                    || {
                        format!(
                            "({k1}, {k2}) fold {s}: {} != {} + {}",
                            fit.total,
                            fit.test_mse,
                            d * lambda
                        )
                    },
                )?;
                checked += 1;
            }
        }
    }
    let res = select(&g, &cfg).map_err(|e| e.to_string())?;
    for p in &res.surface {
        let d = (p.k1 * p.k2) as f64;
        ensure(p.penalty == d * res.lambda && p.total == p.mse + d * res.lambda, || {
            format!("surface ({}, {}) does not decompose", p.k1, p.k2)
        })?;
        checked += 1;
    }
    Ok(format!("{checked} losses decompose exactly"))
}

fn permute(labels: &LabelVector, perm: &[usize]) -> LabelVector {
    let v = labels.as_slice().iter().map(|&l| perm[l]).collect();
    LabelVector::new(v, labels.k(), labels.side()).unwrap()
}

/// Renaming cluster ids leaves every loss component unchanged.
pub fn relabeling_invariance(perms: usize, seed: u64) -> Check {
    let g = planted(seed, 40, 30);
    let plan = make_split(g.n1(), g.n2(), SplitMode::KFold { folds: 10 }, seed).map_err(|e| e.to_string())?;
    let lambda = penalty_factor(&g, 0.01).map_err(|e| e.to_string())?;
    let fit = candidate_loss(&g, &plan, 2, 3, 4, lambda, &DRule::Product, 10, seed).map_err(|e| e.to_string())?;
    let base =
        score_labels(&g, &plan, 2, &fit.labels1, &fit.labels2, lambda, &DRule::Product).map_err(|e| e.to_string())?;
    ensure(base.total == fit.total, || "rescoring changed the loss".into())?;
    let mut r = rng(seed);
    for t in 0..perms {
        let mut p1: Vec<usize> = (0..fit.labels1.k()).collect();
        let mut p2: Vec<usize> = (0..fit.labels2.k()).collect();
        p1.shuffle(&mut r);
        p2.shuffle(&mut r);
        let l1 = permute(&fit.labels1, &p1);
        let l2 = permute(&fit.labels2, &p2);
        let s = score_labels(&g, &plan, 2, &l1, &l2, lambda, &DRule::Product).map_err(|e| e.to_string())?;
        ensure(
            s.test_mse == base.test_mse && s.penalty == base.penalty && s.total == base.total,
            || format!("permutation {t}: total {} vs {}", s.total, base.total),
        )?;
        for (a, &pa) in p1.iter().enumerate() {
            for (b, &pb) in p2.iter().enumerate() {
                ensure(s.b_hat[(pa, pb)] == base.b_hat[(a, b)], || {
                    format!("permutation {t}: B-hat not permuted")
                })?;
            }
        }
    }
    Ok(format!("{perms} permutations, total {:.6e} unchanged", base.total))
}

/// Every pair is held out in exactly one fold.
pub fn kfold_partition() -> Check {
    let mut sizes = 0;
    for (n1, n2, folds, seed) in [
        (20, 30, 10, 0),
        (7, 13, 10, 1),
        (37, 23, 7, 2),
        (2, 5, 10, 3),
        (50, 41, 2, 4),
    ] {
        let plan = make_split(n1, n2, SplitMode::KFold { folds }, seed).map_err(|e| e.to_string())?;
        let mut seen = vec![0u8; n1 * n2];
        for s in 0..folds {
            let eval = plan.eval_pairs(s);
            let expected = n1 * n2 / folds;
            ensure(eval.len() == expected || eval.len() == expected + 1, || {
                format!("{n1}x{n2}/{folds}: fold {s} has {} pairs", eval.len())
            })?;
            for &p in eval {
                seen[p as usize] += 1;
            }
        }
        ensure(seen.iter().all(|&c| c == 1), || {
            format!("{n1}x{n2}/{folds}: a pair is not held out exactly once")
        })?;
        sizes += 1;
    }
    Ok(format!("{sizes} plans partition their pairs"))
}

/// Two runs with the same seed produce identical files.
pub fn end_to_end_determinism(seed: u64) -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = |out: &str| ExperimentConfig {
        setting: SettingId::Balanced2,
        r: 0.3,
        n0: vec![20, 30],
        reps: 3,
        methods: vec![Method::Bcv, Method::Projection, Method::Bimodularity],
        max_modules: 6,
        seed,
        output: Some(dir.path().join(out)),
        ..ExperimentConfig::default()
    };
    run_experiment(&cfg("a")).map_err(|e| e.to_string())?;
    run_experiment(&cfg("b")).map_err(|e| e.to_string())?;
    let mut files = 0;
    for name in ["summary.csv", "replications.csv"] {
        let a = std::fs::read(dir.path().join("a").join(name)).map_err(|e| e.to_string())?;
        let b = std::fs::read(dir.path().join("b").join(name)).map_err(|e| e.to_string())?;
        ensure(a == b, || format!("{name} differs between runs"))?;
        files += 1;
    }
    let g = planted(seed, 60, 50);
    let bcv = BcvConfig {
        seed,
        ..BcvConfig::default()
    };
    for name in ["s1.csv", "s2.csv"] {
        let res = select(&g, &bcv).map_err(|e| e.to_string())?;
        write_surface_csv(&res, dir.path().join(name)).map_err(|e| e.to_string())?;
    }
    let a = std::fs::read(dir.path().join("s1.csv")).map_err(|e| e.to_string())?;
    let b = std::fs::read(dir.path().join("s2.csv")).map_err(|e| e.to_string())?;
    ensure(a == b, || "surface CSV differs between runs".into())?;
    Ok(format!("{} file pairs identical", files + 1))
}
