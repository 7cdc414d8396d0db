//! Sweep-level properties: linear growth under the single-channel optimum
//! and horizon-independent age in the sub-carrier model.

use aoi_adversary::experiment::{sweep, SweepRanges, SweepRow};
use aoi_adversary::rational::{frac, int};
use aoi_adversary::Indexing;

fn metric<'a>(rows: &'a [SweepRow], name: &'a str) -> impl Iterator<Item = &'a SweepRow> + 'a {
    rows.iter().filter(move |r| r.metric == name)
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn blocked_user_age_grows_with_slope_alpha_sq_over_2() {
    for (alpha, n) in [(frac(1, 2), 2usize), (frac(1, 5), 3)] {
        let a = aoi_adversary::rational::to_f64(&alpha);
        let ranges = SweepRanges {
            users: vec![n],
            horizons: (100..=1000).step_by(100).collect(),
            alphas: vec![alpha],
            subcarriers: vec![],
        };
        let rows = sweep(&ranges, Indexing::Shifted, 1, 0).unwrap();
        let pts: Vec<(f64, f64)> = metric(&rows, "blocked_user_mean")
            .map(|r| (r.horizon as f64, r.value))
            .collect();
        assert_eq!(pts.len(), 10);
        let s = slope(&pts);
        let target = a * a / 2.0;
        assert!((s - target).abs() / target < 0.10, "alpha={a}: slope {s} vs {target}");
        // every point sits inside the single-channel bounds
        for t in [100, 1000] {
            let get = |m: &str| metric(&rows, m).find(|r| r.horizon == t).unwrap().value;
            assert!(get("lemma2_lower") <= get("overall_mean") && get("overall_mean") <= get("thm2_upper"));
        }
    }
}

#[test]
fn fully_jammed_subcarrier_age_is_flat_and_matches_bound() {
    let ranges = SweepRanges {
        users: vec![2],
        horizons: vec![1000, 2000],
        alphas: vec![int(1)],
        subcarriers: (2..=16).collect(),
    };
    let rows = sweep(&ranges, Indexing::Shifted, 200, 3).unwrap();
    let means: Vec<&SweepRow> = metric(&rows, "sim_mean").collect();
    assert_eq!(means.len(), 30);
    for m in &means {
        let find = |name: &str| {
            metric(&rows, name)
                .find(|r| r.horizon == m.horizon && r.n_subcarriers == m.n_subcarriers)
                .unwrap()
                .value
        };
        let (se, bound) = (find("sim_std_error"), find("thm4_upper"));
        // the first slots start from age 1, so allow the transient on top of 3 SE
        let transient = bound * bound / m.horizon as f64;
        assert!((m.value - bound).abs() <= 3.0 * se + transient, "{m:?} bound {bound} se {se}");
    }
    for ns in 2..=16 {
        let at = |t: usize| means.iter().find(|r| r.horizon == t && r.n_subcarriers == Some(ns)).unwrap().value;
        assert!((at(1000) - at(2000)).abs() / at(2000) < 0.02, "Nsub={ns}");
    }
}

#[test]
fn sweep_is_deterministic() {
    let ranges = SweepRanges {
        users: vec![2, 4],
        horizons: vec![50, 80],
        alphas: vec![frac(1, 4)],
        subcarriers: vec![2, 3],
    };
    let a = sweep(&ranges, Indexing::Shifted, 50, 9).unwrap();
    let b = sweep(&ranges, Indexing::Shifted, 50, 9).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 2 * 2 * 2 * 4);
}
