//! Seeded Monte Carlo campaigns.
//!
//! Campaigns split work by replicate: replicate `r` of the `i`-th entry in
//! the `n` list draws from the ChaCha stream `(i << 40) | r` under the
//! master seed, and aggregation is a sequential fold over the
//! replicate-indexed results. Any rayon schedule therefore produces the
//! identical report.

use rayon::prelude::*;

use crate::analysis::report::{
    wilson_interval, BoundCheck, CampaignConfig, CampaignReport, RateFit, StatRow, REPORT_SCHEMA,
};
use crate::error::{Error, Result};
use crate::exact::exact_wn;
use crate::graph::{pair_count, sample_weights, EdgeWeights};
use crate::paths::{best_threshold_lower_bound, default_tau_grid};
use crate::rng::replicate_rng;
use crate::weights::WeightDistribution;

const MODE_EXACT: &str = "exact";
const MODE_LOWER_BOUND: &str = "lower-bound";

/// Largest `n` the exact solver handles inside campaigns; beyond it the
/// threshold pipeline stands in and the row is flagged `lower-bound`.
pub const EXACT_MODE_LIMIT: usize = 22;

fn stream_id(n_index: usize, replicate: usize) -> u64 {
    debug_assert!(replicate < (1usize << 40));
    ((n_index as u64) << 40) | replicate as u64
}

/// Measures `W_n / n` across seeded replicates for each `n`.
///
/// Uses the exact solver for `n <= 22` and the threshold lower-bound
/// pipeline above that (per-row `mode` records which). Checks that the
/// per-`n` means increase and, for bounded laws, stay strictly below `mu`.
pub fn estimate_time_constant(
    dist: &WeightDistribution,
    n_list: &[usize],
    replicates: usize,
    seed: u64,
) -> Result<CampaignReport> {
    if replicates < 2 {
        return Err(Error::Precondition(format!("requires replicates >= 2, got {replicates}")));
    }
    if n_list.is_empty() {
        return Err(Error::Precondition("n list must be nonempty".to_string()));
    }
    if let Some(&bad) = n_list.iter().find(|&&n| n < 2) {
        return Err(Error::Precondition(format!("requires n >= 2, got {bad}")));
    }

    let mut rows = Vec::with_capacity(n_list.len());
    let mut all_below_mu = true;
    for (idx, &n) in n_list.iter().enumerate() {
        let exact_mode = n <= EXACT_MODE_LIMIT;
        let values: Vec<f64> = (0..replicates)
            .into_par_iter()
            .map(|r| {
                let mut rng = replicate_rng(seed, stream_id(idx, r));
                let w = sample_weights(n, dist, &mut rng).expect("n >= 2");
                let wn = if exact_mode {
                    exact_wn(&w).expect("n <= 22").value
                } else {
                    best_threshold_lower_bound(&w, &default_tau_grid(&w)).expect("grid").1
                };
                wn / n as f64
            })
            .collect();
        if let Some(mu) = dist.essential_supremum().finite() {
            all_below_mu &= values.iter().all(|&v| v < mu);
        }
        let mode = if exact_mode { MODE_EXACT } else { MODE_LOWER_BOUND };
        rows.push(StatRow::new(n, mode, "w_over_n", &values));
    }

    let mut checks = vec![BoundCheck {
        name: "means_strictly_increasing".to_string(),
        formula: "mean(W_n/n) strictly increasing along the n list".to_string(),
        pass: rows.windows(2).all(|w| w[0].mean < w[1].mean),
        observed: None,
        bound: None,
    }];
    if let Some(mu) = dist.essential_supremum().finite() {
        let max_mean = rows.iter().map(|r| r.mean).fold(f64::NEG_INFINITY, f64::max);
        checks.push(BoundCheck {
            name: "means_below_mu".to_string(),
            formula: "mean(W_n/n) < mu for a bounded law".to_string(),
            pass: max_mean < mu,
            observed: Some(max_mean),
            bound: Some(mu),
        });
        checks.push(BoundCheck {
            name: "replicates_below_mu".to_string(),
            formula: "every replicate W_n/n < mu (paths have at most n-1 edges)".to_string(),
            pass: all_below_mu,
            observed: None,
            bound: Some(mu),
        });
    }

    Ok(CampaignReport {
        schema: REPORT_SCHEMA,
        config: CampaignConfig {
            campaign: "time-constant".to_string(),
            dist: dist.to_string(),
            n_list: n_list.to_vec(),
            replicates,
            seed,
            x: None,
        },
        rows,
        fit: None,
        checks,
    })
}

/// Decides `W_n <= threshold` without always paying for the full solve:
/// the sum of the `n - 1` largest weights bounds any path from above, and
/// the direct edge bounds `W_n` from below. The subset DP settles the rest.
fn deviation_event(w: &EdgeWeights, threshold: f64) -> bool {
    let n = w.n();
    let k = n - 1;
    let m = pair_count(n);
    let mut flat = w.flat().to_vec();
    let split = m - k;
    flat.select_nth_unstable_by(split, f64::total_cmp);
    let top = &mut flat[split..];
    top.sort_by(|a, b| b.total_cmp(a));
    let upper: f64 = top.iter().sum();
    if upper <= threshold {
        return true;
    }
    if w.weight(1, n) > threshold {
        return false;
    }
    exact_wn(w).expect("campaign n within DP guard").value <= threshold
}

/// Estimates the deviation probability `P(W_n <= (mu - x) n)` per `n`,
/// fits `ln p̂ ≈ a + b n + c n²` by weighted least squares (weights are the
/// event counts), and checks the analytic floor `(1-p)^{n(n-1)/2}`.
pub fn estimate_deviation(
    dist: &WeightDistribution,
    x: f64,
    n_list: &[usize],
    replicates: usize,
    seed: u64,
) -> Result<CampaignReport> {
    let mu = dist
        .essential_supremum()
        .finite()
        .ok_or_else(|| Error::Precondition("deviation campaign requires mu < inf".to_string()))?;
    if !(x > 0.0 && x < mu) {
        return Err(Error::Precondition(format!("requires 0 < x < mu, got x={x}, mu={mu}")));
    }
    let p = dist.tail(mu - x);
    if p >= 1.0 {
        return Err(Error::Precondition(format!(
            "degenerate deviation event: p = H(mu-x) = {p} >= 1"
        )));
    }
    if replicates < 2 {
        return Err(Error::Precondition(format!("requires replicates >= 2, got {replicates}")));
    }
    if n_list.is_empty() {
        return Err(Error::Precondition("n list must be nonempty".to_string()));
    }
    if let Some(&bad) = n_list.iter().find(|&&n| !(2..=EXACT_MODE_LIMIT).contains(&n)) {
        return Err(Error::Precondition(format!(
            "deviation campaign needs the exact solver: n must lie in 2..=22, got {bad}"
        )));
    }

    let mut rows = Vec::with_capacity(n_list.len());
    let mut floor_ok = true;
    for (idx, &n) in n_list.iter().enumerate() {
        let threshold = (mu - x) * n as f64;
        let events: Vec<bool> = (0..replicates)
            .into_par_iter()
            .map(|r| {
                let mut rng = replicate_rng(seed, stream_id(idx, r));
                let w = sample_weights(n, dist, &mut rng).expect("n >= 2");
                deviation_event(&w, threshold)
            })
            .collect();
        let count = events.iter().filter(|&&e| e).count() as u64;
        let p_hat = count as f64 / replicates as f64;
        let floor = (1.0 - p).powi(pair_count(n) as i32);
        let floor_se = (floor * (1.0 - floor) / replicates as f64).sqrt();
        floor_ok &= p_hat >= floor - 4.0 * floor_se;
        let (wl, wh) = wilson_interval(count, replicates);

        let mut row = StatRow::new(
            n,
            MODE_EXACT,
            "event_w_le_threshold",
            &[], // moments filled below from the Bernoulli counts
        );
        row.replicates = replicates;
        row.mean = p_hat;
        row.variance = p_hat * (1.0 - p_hat);
        row.ci_half_width = 1.96 * (row.variance / replicates as f64).sqrt();
        row.event_count = Some(count);
        row.p_hat = Some(p_hat);
        row.ln_p_hat = if count > 0 { Some(p_hat.ln()) } else { None };
        row.wilson_low = Some(wl);
        row.wilson_high = Some(wh);
        row.floor = Some(floor);
        row.insufficient = Some(replicates as f64 * floor < 10.0);
        rows.push(row);
    }

    let points: Vec<(f64, f64, f64)> = rows
        .iter()
        .filter_map(|r| {
            let count = r.event_count.unwrap();
            r.ln_p_hat.map(|y| (r.n as f64, y, count as f64))
        })
        .collect();
    let fit = fit_rates(&points);

    let mut checks = vec![BoundCheck {
        name: "floor_respected".to_string(),
        formula: "p_hat >= (1-p)^(n(n-1)/2) - 4 se at every n".to_string(),
        pass: floor_ok,
        observed: None,
        bound: None,
    }];
    if let Some(f) = &fit {
        checks.push(BoundCheck {
            name: "quadratic_coefficient_negative".to_string(),
            formula: "c < 0 in ln p ≈ a + b n + c n²".to_string(),
            pass: f.c < 0.0,
            observed: Some(f.c),
            bound: Some(0.0),
        });
        checks.push(BoundCheck {
            name: "quadratic_beats_linear".to_string(),
            formula: "weighted SSR(a + b n + c n²) < weighted SSR(a + b n)".to_string(),
            pass: f.weighted_ssr_quadratic < f.weighted_ssr_linear,
            observed: Some(f.weighted_ssr_quadratic),
            bound: Some(f.weighted_ssr_linear),
        });
    }

    Ok(CampaignReport {
        schema: REPORT_SCHEMA,
        config: CampaignConfig {
            campaign: "deviation".to_string(),
            dist: dist.to_string(),
            n_list: n_list.to_vec(),
            replicates,
            seed,
            x: Some(x),
        },
        rows,
        fit,
        checks,
    })
}

/// The two-sided experiment for unbounded laws at one `n`: the upper event
/// `U = {all weights <= g(n)}` (which forces `W_n/n <= g(n)`) against its
/// union-bound prediction `1 - n² H(g(n))`, and the pipeline lower bound
/// `L` reported as the ratio `L / (n f(n))`.
pub fn sandwich_experiment(
    dist: &WeightDistribution,
    n: usize,
    replicates: usize,
    seed: u64,
) -> Result<CampaignReport> {
    let g_n = dist.g_of_n(n)?; // also rejects bounded laws and n < 16
    let f_n = dist.f_of_n(n)?;
    if replicates < 1 {
        return Err(Error::Precondition("requires replicates >= 1".to_string()));
    }

    struct Rep {
        upper_event: bool,
        ratio: f64,
        path_valid: bool,
    }

    let reps: Vec<Rep> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(seed, stream_id(0, r));
            let w = sample_weights(n, dist, &mut rng).expect("n >= 16");
            let max_w = w.max_weight();
            let mut grid = default_tau_grid(&w);
            grid.push(f_n);
            let (path, value) = best_threshold_lower_bound(&w, &grid).expect("nonempty grid");
            Rep {
                upper_event: max_w <= g_n,
                ratio: value / (n as f64 * f_n),
                path_valid: path.first() == 1
                    && path.last() == n
                    && value > 0.0
                    && value <= (n - 1) as f64 * max_w,
            }
        })
        .collect();

    let freq_upper =
        reps.iter().filter(|r| r.upper_event).count() as f64 / replicates as f64;
    let union_bound = (1.0 - (n as f64) * (n as f64) * dist.tail(g_n)).max(0.0);
    let ratios: Vec<f64> = reps.iter().map(|r| r.ratio).collect();
    let paths_valid = reps.iter().all(|r| r.path_valid);

    let mut row = StatRow::new(n, MODE_LOWER_BOUND, "lower_bound_ratio", &ratios);
    row.freq_upper_event = Some(freq_upper);
    row.union_bound_prediction = Some(union_bound);

    let se = (freq_upper * (1.0 - freq_upper) / replicates as f64).sqrt();
    let checks = vec![
        BoundCheck {
            name: "upper_event_meets_union_bound".to_string(),
            formula: "freq(all weights <= g(n)) >= 1 - n² H(g(n)) - 4 se".to_string(),
            pass: freq_upper >= union_bound - 4.0 * se,
            observed: Some(freq_upper),
            bound: Some(union_bound),
        },
        BoundCheck {
            name: "pipeline_paths_valid".to_string(),
            formula: "each lower-bound path runs 1 -> n with 0 < L <= (n-1) max weight"
                .to_string(),
            pass: paths_valid,
            observed: None,
            bound: None,
        },
    ];

    Ok(CampaignReport {
        schema: REPORT_SCHEMA,
        config: CampaignConfig {
            campaign: "sandwich".to_string(),
            dist: dist.to_string(),
            n_list: vec![n],
            replicates,
            seed,
            x: None,
        },
        rows: vec![row],
        fit: None,
        checks,
    })
}

/// Weighted least squares of `y ≈ a + b n + c n²` and `y ≈ a + b n`;
/// needs at least three points for the quadratic.
fn fit_rates(points: &[(f64, f64, f64)]) -> Option<RateFit> {
    if points.len() < 3 {
        return None;
    }
    let (quad, ssr_q) = solve_quadratic(points)?;
    let (lin, ssr_l) = solve_linear(points)?;
    Some(RateFit {
        a: quad.0,
        b: quad.1,
        c: quad.2,
        weighted_ssr_quadratic: ssr_q,
        linear_a: lin.0,
        linear_b: lin.1,
        weighted_ssr_linear: ssr_l,
    })
}

fn solve_quadratic(points: &[(f64, f64, f64)]) -> Option<((f64, f64, f64), f64)> {
    let mut s = [0.0f64; 5]; // sum w n^k
    let mut t = [0.0f64; 3]; // sum w n^k y
    for &(n, y, w) in points {
        let mut nk = 1.0;
        for (k, sk) in s.iter_mut().enumerate() {
            *sk += w * nk;
            if k < 3 {
                t[k] += w * nk * y;
            }
            nk *= n;
        }
    }
    let m = [[s[0], s[1], s[2]], [s[1], s[2], s[3]], [s[2], s[3], s[4]]];
    let det3 = |a: &[[f64; 3]; 3]| -> f64 {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let d = det3(&m);
    if d.abs() < 1e-12 {
        return None;
    }
    let mut cols = [m, m, m];
    for (k, col) in cols.iter_mut().enumerate() {
        for row in 0..3 {
            col[row][k] = t[row];
        }
    }
    let a = det3(&cols[0]) / d;
    let b = det3(&cols[1]) / d;
    let c = det3(&cols[2]) / d;
    let ssr = points
        .iter()
        .map(|&(n, y, w)| {
            let e = y - (a + b * n + c * n * n);
            w * e * e
        })
        .sum();
    Some(((a, b, c), ssr))
}

fn solve_linear(points: &[(f64, f64, f64)]) -> Option<((f64, f64), f64)> {
    let (mut s0, mut s1, mut s2, mut t0, mut t1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(n, y, w) in points {
        s0 += w;
        s1 += w * n;
        s2 += w * n * n;
        t0 += w * y;
        t1 += w * n * y;
    }
    let d = s0 * s2 - s1 * s1;
    if d.abs() < 1e-12 {
        return None;
    }
    let a = (t0 * s2 - t1 * s1) / d;
    let b = (s0 * t1 - s1 * t0) / d;
    let ssr = points
        .iter()
        .map(|&(n, y, w)| {
            let e = y - (a + b * n);
            w * e * e
        })
        .sum();
    Some(((a, b), ssr))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coin() -> WeightDistribution {
        WeightDistribution::two_point(1.0, 2.0, 0.5).unwrap()
    }

    #[test]
    fn time_constant_small_campaign() {
        let dist = WeightDistribution::uniform(0.0, 1.0).unwrap();
        let report = estimate_time_constant(&dist, &[4, 8, 12], 60, 7).unwrap();
        assert_eq!(report.rows.len(), 3);
        assert!(report.rows.iter().all(|r| r.mode == "exact"));
        assert!(report.rows.iter().all(|r| r.mean > 0.0 && r.mean < 1.0));
        let increasing = report.checks.iter().find(|c| c.name == "means_strictly_increasing");
        assert!(increasing.unwrap().pass);
        assert!(report.checks.iter().all(|c| c.pass));
    }

    #[test]
    fn time_constant_w2_mean() {
        // W_2/2 = X_12/2, expectation (0.5*1 + 0.5*2)/2 = 0.75
        let report = estimate_time_constant(&coin(), &[2], 4000, 11).unwrap();
        let row = &report.rows[0];
        assert!(
            (row.mean - 0.75).abs() <= 4.0 * (row.variance / 4000f64).sqrt(),
            "mean {} too far from 0.75",
            row.mean
        );
    }

    #[test]
    fn time_constant_switches_to_pipeline_mode() {
        let dist = WeightDistribution::exponential(1.0).unwrap();
        let report = estimate_time_constant(&dist, &[30], 3, 5).unwrap();
        assert_eq!(report.rows[0].mode, "lower-bound");
        assert!(estimate_time_constant(&dist, &[10], 1, 5).is_err());
    }

    #[test]
    fn deviation_campaign_floor_and_shape() {
        let dist = WeightDistribution::two_point(1.0, 2.0, 0.05).unwrap();
        let report = estimate_deviation(&dist, 0.75, &[4, 6, 8], 4000, 3).unwrap();
        assert!(report.checks.iter().find(|c| c.name == "floor_respected").unwrap().pass);
        let fit = report.fit.as_ref().expect("three usable points");
        assert!(fit.weighted_ssr_quadratic <= fit.weighted_ssr_linear);
        for row in &report.rows {
            let f = row.floor.unwrap();
            assert!(f > 0.0 && f < 1.0);
            assert!(row.p_hat.unwrap() >= 0.0);
        }
    }

    #[test]
    fn deviation_event_shortcuts_agree_with_solver() {
        let dist = WeightDistribution::two_point(1.0, 2.0, 0.3).unwrap();
        for r in 0..200u64 {
            let n = 6;
            let w = sample_weights(n, &dist, &mut replicate_rng(21, r)).unwrap();
            let threshold = 1.25 * n as f64;
            assert_eq!(
                deviation_event(&w, threshold),
                exact_wn(&w).unwrap().value <= threshold,
                "replicate {r}"
            );
        }
    }

    #[test]
    fn deviation_campaign_preconditions() {
        let exp = WeightDistribution::exponential(1.0).unwrap();
        assert!(estimate_deviation(&exp, 0.5, &[6], 100, 1).is_err()); // unbounded
        assert!(estimate_deviation(&coin(), 0.75, &[23], 100, 1).is_err()); // beyond DP
        assert!(estimate_deviation(&coin(), 2.5, &[6], 100, 1).is_err()); // x >= mu
        // mu - x below the support minimum: degenerate event
        assert!(estimate_deviation(&coin(), 1.5, &[6], 100, 1).is_err());
    }

    #[test]
    fn sandwich_small_run() {
        let dist = WeightDistribution::exponential(1.0).unwrap();
        let report = sandwich_experiment(&dist, 64, 10, 17).unwrap();
        let row = &report.rows[0];
        assert!(row.freq_upper_event.unwrap() >= 0.0);
        assert!(row.union_bound_prediction.unwrap() > 0.0);
        assert!(report.checks.iter().find(|c| c.name == "pipeline_paths_valid").unwrap().pass);
        assert!(sandwich_experiment(&dist, 10, 5, 17).is_err()); // n < 16
        let u = WeightDistribution::uniform(0.0, 1.0).unwrap();
        assert!(sandwich_experiment(&u, 64, 5, 17).is_err()); // bounded
    }

    #[test]
    fn reports_are_bitwise_deterministic_across_thread_counts() {
        let dist = WeightDistribution::uniform(0.0, 1.0).unwrap();
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| estimate_time_constant(&dist, &[6, 9], 40, 123).unwrap())
        };
        let one = run(1);
        let four = run(4);
        assert_eq!(one.to_json_string(), four.to_json_string());
        assert_eq!(one.to_csv_string(), four.to_csv_string());

        let dev = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| {
                estimate_deviation(&coin(), 0.75, &[4, 6, 8], 500, 9).unwrap().to_json_string()
            })
        };
        assert_eq!(dev(1), dev(3));
    }

    #[test]
    fn quadratic_fit_recovers_exact_polynomial() {
        let points: Vec<(f64, f64, f64)> = [4.0f64, 6.0, 8.0, 10.0]
            .iter()
            .map(|&n| (n, 1.5 - 0.25 * n - 0.03 * n * n, (n * 10.0).round()))
            .collect();
        let fit = fit_rates(&points).unwrap();
        assert!((fit.a - 1.5).abs() < 1e-9);
        assert!((fit.b + 0.25).abs() < 1e-9);
        assert!((fit.c + 0.03).abs() < 1e-9);
        assert!(fit.weighted_ssr_quadratic < 1e-12);
        assert!(fit.weighted_ssr_linear > fit.weighted_ssr_quadratic);
    }
}
