//! k-means: k-means++ seeding, Lloyd iterations, then single-point
//! (Hartigan) moves, with independent restarts.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{BcvError, Result};
use crate::rng::{task_rng, TaskRng, TAG_KMEANS};

#[derive(Debug, Clone, Copy)]
pub struct KMeansOptions {
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iter: 300,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    /// K x d, one center per row.
    pub centers: DMatrix<f64>,
    /// Sum of squared distances from points to their assigned centers.
    pub objective: f64,
}

/// Clusters the rows of `points` into `k` groups; returns the best of
/// `opts.restarts` runs (lowest objective, earliest restart on ties).
pub fn kmeans(points: &DMatrix<f64>, k: usize, opts: &KMeansOptions) -> Result<KMeansResult> {
    let (m, d) = points.shape();
    if k == 0 || k > m {
        return Err(BcvError::InvalidParameter(format!(
            "cannot form {k} clusters from {m} points"
        )));
    }
    if d == 0 {
        return Err(BcvError::InvalidParameter("points need at least one coordinate".into()));
    }
    if opts.restarts == 0 {
        return Err(BcvError::InvalidParameter("restarts must be positive".into()));
    }
    if points.iter().any(|v| !v.is_finite()) {
        return Err(BcvError::NonFinite("k-means points"));
    }
    let data = RowMajor {
        d,
        vals: (0..m)
            .flat_map(|i| points.row(i).iter().copied().collect::<Vec<_>>())
            .collect(),
    };

    let runs: Vec<Run> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = task_rng(opts.seed, &[TAG_KMEANS, r as u64]);
            lloyd(&data, k, opts.max_iter, &mut rng)
        })
        .collect();
    let best = runs
        .into_iter()
        .reduce(|best, run| if run.objective < best.objective { run } else { best })
        .expect("at least one restart");
    Ok(KMeansResult {
        labels: best.labels,
        centers: DMatrix::from_row_slice(k, d, &best.centers),
        objective: best.objective,
    })
}

struct RowMajor {
    d: usize,
    vals: Vec<f64>,
}

impl RowMajor {
    fn len(&self) -> usize {
        self.vals.len() / self.d
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.vals[i * self.d..(i + 1) * self.d]
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

struct Run {
    labels: Vec<usize>,
    centers: Vec<f64>,
    objective: f64,
    #[cfg_attr(not(test), allow(dead_code))]
    history: Vec<f64>,
}

fn plus_plus_init(data: &RowMajor, m: usize, k: usize, rng: &mut TaskRng) -> Vec<f64> {
    let d = data.d;
    let mut centers = Vec::with_capacity(k * d);
    centers.extend_from_slice(data.row(rng.random_range(0..m)));
    let mut dist: Vec<f64> = (0..m).map(|i| sq_dist(data.row(i), &centers[0..d])).collect();
    for c in 1..k {
        let total: f64 = dist.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (i, &w) in dist.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    chosen = Some(i);
                    break;
                }
            }
            // Rounding can leave target beyond the last partial sum.
            chosen.unwrap_or_else(|| dist.iter().rposition(|&w| w > 0.0).expect("positive mass"))
        } else {
            rng.random_range(0..m)
        };
        centers.extend_from_slice(data.row(pick));
        let new = &centers[c * d..(c + 1) * d];
        for (i, di) in dist.iter_mut().enumerate() {
            *di = di.min(sq_dist(data.row(i), new));
        }
    }
    centers
}

fn assign(data: &RowMajor, centers: &[f64], k: usize, labels: &mut [usize], dists: &mut [f64]) -> bool {
    let d = data.d;
    let mut changed = false;
    for (i, label) in labels.iter_mut().enumerate() {
        let x = data.row(i);
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for c in 0..k {
            let dc = sq_dist(x, &centers[c * d..(c + 1) * d]);
            if dc < best_d {
                best_d = dc;
                best = c;
            }
        }
        if *label != best {
            *label = best;
            changed = true;
        }
        dists[i] = best_d;
    }
    changed
}

/// Recomputes centers as cluster means. Empty clusters are re-seeded at the
/// point currently farthest from its own center, which then joins them.
fn update_centers(data: &RowMajor, k: usize, labels: &mut [usize], dists: &mut [f64], centers: &mut [f64]) {
    let d = data.d;
    let m = labels.len();
    let mut counts = vec![0usize; k];
    for &l in labels.iter() {
        counts[l] += 1;
    }
    for c in 0..k {
        if counts[c] > 0 {
            continue;
        }
        let far = (0..m)
            .filter(|&i| counts[labels[i]] > 1)
            .fold(None, |best: Option<usize>, i| match best {
                Some(b) if dists[b] >= dists[i] => Some(b),
                _ => Some(i),
            });
        if let Some(i) = far {
            if dists[i] > 0.0 {
                counts[labels[i]] -= 1;
                labels[i] = c;
                counts[c] = 1;
                dists[i] = 0.0;
            }
        }
    }
    let mut sums = vec![0.0; k * d];
    for (i, &l) in labels.iter().enumerate() {
        for (s, x) in sums[l * d..(l + 1) * d].iter_mut().zip(data.row(i)) {
            *s += x;
        }
    }
    for c in 0..k {
        if counts[c] == 0 {
            continue;
        }
        let inv = 1.0 / counts[c] as f64;
        for t in 0..d {
            centers[c * d + t] = sums[c * d + t] * inv;
        }
    }
}

fn objective(data: &RowMajor, centers: &[f64], labels: &[usize]) -> f64 {
    let d = data.d;
    labels
        .iter()
        .enumerate()
        .map(|(i, &l)| sq_dist(data.row(i), &centers[l * d..(l + 1) * d]))
        .sum()
}

/// Moves single points between clusters while a move lowers the objective,
/// accounting for the shift of both centers. A Lloyd fixed point can still
/// admit such moves. Returns whether anything moved.
fn hartigan(data: &RowMajor, k: usize, max_sweeps: usize, labels: &mut [usize], centers: &mut [f64]) -> bool {
    let d = data.d;
    let mut counts = vec![0usize; k];
    for &l in labels.iter() {
        counts[l] += 1;
    }
    let mut any = false;
    for _ in 0..max_sweeps {
        let mut moved = false;
        for (i, label) in labels.iter_mut().enumerate() {
            let a = *label;
            let na = counts[a] as f64;
            if counts[a] < 2 {
                continue;
            }
            let x = data.row(i);
            let remove = na / (na - 1.0) * sq_dist(x, &centers[a * d..(a + 1) * d]);
            let mut best = a;
            let mut best_add = remove;
            for b in (0..k).filter(|&b| b != a) {
                let nb = counts[b] as f64;
                let add = nb / (nb + 1.0) * sq_dist(x, &centers[b * d..(b + 1) * d]);
                if add < best_add {
                    best = b;
                    best_add = add;
                }
            }
            // Relative margin guards against cycling on rounding noise.
            if best == a || best_add >= remove * (1.0 - 1e-12) {
                continue;
            }
            let nb = counts[best] as f64;
            for t in 0..d {
                centers[a * d + t] = (na * centers[a * d + t] - x[t]) / (na - 1.0);
                centers[best * d + t] = (nb * centers[best * d + t] + x[t]) / (nb + 1.0);
            }
            counts[a] -= 1;
            counts[best] += 1;
            *label = best;
            moved = true;
        }
        if !moved {
            break;
        }
        any = true;
    }
    if any {
        // Recompute means exactly, dropping accumulated rounding.
        let mut sums = vec![0.0; k * d];
        for (i, &l) in labels.iter().enumerate() {
            for (s, x) in sums[l * d..(l + 1) * d].iter_mut().zip(data.row(i)) {
                *s += x;
            }
        }
        for c in (0..k).filter(|&c| counts[c] > 0) {
            for t in 0..d {
                centers[c * d + t] = sums[c * d + t] / counts[c] as f64;
            }
        }
    }
    any
}

fn lloyd(data: &RowMajor, k: usize, max_iter: usize, rng: &mut TaskRng) -> Run {
    let m = data.len();
    let mut centers = plus_plus_init(data, m, k, rng);
    let mut labels = vec![usize::MAX; m];
    let mut dists = vec![0.0; m];
    let mut history = Vec::new();
    for _ in 0..max_iter {
        let changed = assign(data, &centers, k, &mut labels, &mut dists);
        history.push(dists.iter().sum());
        if !changed {
            break;
        }
        update_centers(data, k, &mut labels, &mut dists, &mut centers);
    }
    if hartigan(data, k, max_iter, &mut labels, &mut centers) {
        history.push(objective(data, &centers, &labels));
    }
    let objective = objective(data, &centers, &labels);
    Run {
        labels,
        centers,
        objective,
        history,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn opts(restarts: usize, seed: u64) -> KMeansOptions {
        KMeansOptions {
            restarts,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn recovers_repeated_rows_exactly() {
        let base = [[0.0, 1.0], [5.0, 5.0], [-3.0, 2.0]];
        let rows: Vec<f64> = (0..12).flat_map(|i| base[i % 3]).collect();
        let pts = DMatrix::from_row_slice(12, 2, &rows);
        let res = kmeans(&pts, 3, &opts(3, 1)).unwrap();
        assert_eq!(res.objective, 0.0);
        for i in 0..12 {
            assert_eq!(res.labels[i], res.labels[i % 3]);
        }
        let distinct: std::collections::HashSet<_> = res.labels.iter().collect();
        assert_eq!(distinct.len(), 3);
    }

    #[test]
    fn single_cluster_is_the_mean() {
        let pts = DMatrix::from_row_slice(4, 1, &[1.0, 2.0, 3.0, 6.0]);
        let res = kmeans(&pts, 1, &opts(2, 0)).unwrap();
        assert!(res.labels.iter().all(|&l| l == 0));
        assert!((res.centers[(0, 0)] - 3.0).abs() < 1e-12);
        assert!((res.objective - (4.0 + 1.0 + 0.0 + 9.0)).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let pts = DMatrix::from_row_slice(2, 1, &[1.0, 2.0]);
        assert!(kmeans(&pts, 3, &opts(1, 0)).is_err());
        let nan = DMatrix::from_row_slice(2, 1, &[1.0, f64::NAN]);
        assert!(matches!(kmeans(&nan, 1, &opts(1, 0)), Err(BcvError::NonFinite(_))));
    }

    #[test]
    fn objective_matches_recomputation_and_is_monotone() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for trial in 0..20 {
            let pts = DMatrix::from_fn(40, 3, |_, _| rng.random::<f64>());
            let data = RowMajor {
                d: 3,
                vals: (0..40)
                    .flat_map(|i| pts.row(i).iter().copied().collect::<Vec<_>>())
                    .collect(),
            };
            let mut run_rng = task_rng(trial, &[]);
            let run = lloyd(&data, 4, 300, &mut run_rng);
            for w in run.history.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "objective rose: {:?}", run.history);
            }
            let res = kmeans(&pts, 4, &opts(3, trial)).unwrap();
            let mut recomputed = 0.0;
            for i in 0..40 {
                recomputed += (pts.row(i) - res.centers.row(res.labels[i])).norm_squared();
            }
            assert!((recomputed - res.objective).abs() <= 1e-9 * recomputed.max(1.0));
        }
    }

    #[test]
    fn more_restarts_never_hurt() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for seed in 0..10 {
            let pts = DMatrix::from_fn(30, 2, |_, _| rng.random::<f64>());
            let few = kmeans(&pts, 5, &opts(2, seed)).unwrap();
            let many = kmeans(&pts, 5, &opts(9, seed)).unwrap();
            assert!(many.objective <= few.objective);
        }
    }

    #[test]
    fn duplicate_heavy_input_collapses_gracefully() {
        // Only two distinct rows but four clusters requested.
        let pts = DMatrix::from_row_slice(6, 1, &[0.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let res = kmeans(&pts, 4, &opts(4, 2)).unwrap();
        assert_eq!(res.objective, 0.0);
        assert_eq!(res.labels[0], res.labels[2]);
        assert_ne!(res.labels[0], res.labels[3]);
    }
}
