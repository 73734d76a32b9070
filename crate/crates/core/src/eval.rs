//! Between-arm comparisons and per-day trends.
//!
//! Rate differences against control carry percentile bootstrap CIs. The
//! bootstrap resamples either messages or participants together with all
//! their messages. Per-day series are scored with a weighted OLS slope and
//! a day-label permutation test.

use crate::delivery::ModelId;
use crate::metrics::{MessageRecord, Metric};
use crate::rng;
use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

pub const DEFAULT_RESAMPLES: usize = 10_000;
pub const DEFAULT_PERMUTATIONS: usize = 2_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("p-value {value} at index {index} is outside [0, 1]")]
    PValueOutOfRange { index: usize, value: f64 },
    #[error("trend needs at least 3 days with messages, found {found}")]
    TooFewPoints { found: usize },
    #[error("resample count must be positive")]
    NoResamples,
}

/// What the bootstrap resamples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResampleUnit {
    Messages,
    /// Clusters keyed by `(replicate, participant)`.
    Participants,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    /// e.g. `static-control`.
    pub label: String,
    pub metric: Metric,
    pub n_treatment: u64,
    pub n_control: u64,
    pub treatment_rate: Option<f64>,
    pub control_rate: Option<f64>,
    /// `None` throughout marks an undefined row (an empty group).
    pub mean_difference: Option<f64>,
    pub percent_change: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub p_value: Option<f64>,
    pub p_adjusted: Option<f64>,
}

impl ComparisonRow {
    pub fn is_defined(&self) -> bool {
        self.mean_difference.is_some()
    }

    pub fn excludes_zero(&self) -> bool {
        match (self.ci_low, self.ci_high) {
            (Some(lo), Some(hi)) => lo > 0.0 || hi < 0.0,
            _ => false,
        }
    }
}

/// `+0.108 (+38.02%)`.
pub fn format_difference(difference: f64, percent_change: f64) -> String {
    format!("{difference:+.3} ({percent_change:+.2}%)")
}

#[derive(Debug, Clone, Copy, Default)]
struct Cell {
    hits: u64,
    n: u64,
}

impl Cell {
    fn rate(&self) -> Option<f64> {
        (self.n > 0).then(|| self.hits as f64 / self.n as f64)
    }
}

/// Per-cluster counts of (treatment, control).
fn clusters(
    records: &[MessageRecord],
    metric: Metric,
    treatment: ModelId,
    control: ModelId,
) -> Vec<(Cell, Cell)> {
    let mut map: BTreeMap<(u32, u32), (Cell, Cell)> = BTreeMap::new();
    for m in records {
        let attributed = m.delivery.model_attributed;
        if attributed != treatment && attributed != control {
            continue;
        }
        let entry = map
            .entry((m.replicate, m.delivery.participant))
            .or_default();
        let cell = if attributed == treatment {
            &mut entry.0
        } else {
            &mut entry.1
        };
        cell.n += 1;
        cell.hits += metric.hit(m) as u64;
    }
    map.into_values().collect()
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let idx = ((q * (sorted.len() - 1) as f64).round() as usize).min(sorted.len() - 1);
    sorted[idx]
}

fn bootstrap_differences(
    cl: &[(Cell, Cell)],
    unit: ResampleUnit,
    resamples: usize,
    seed: u64,
) -> Vec<f64> {
    let (a, b) = cl
        .iter()
        .fold((Cell::default(), Cell::default()), |(a, b), (x, y)| {
            (
                Cell {
                    hits: a.hits + x.hits,
                    n: a.n + x.n,
                },
                Cell {
                    hits: b.hits + y.hits,
                    n: b.n + y.n,
                },
            )
        });
    (0..resamples)
        .into_par_iter()
        .filter_map(|k| {
            let mut r = rng::stream(seed, &[k as u64]);
            match unit {
                // Resampling n messages with replacement from a group with
                // `hits` successes is a Binomial(n, hits / n) draw.
                ResampleUnit::Messages => {
                    let draw = |c: Cell, r: &mut rng::Rng| {
                        Binomial::new(c.n, c.hits as f64 / c.n as f64)
                            .expect("valid binomial")
                            .sample(r) as f64
                            / c.n as f64
                    };
                    let ra = draw(a, &mut r);
                    Some(ra - draw(b, &mut r))
                }
                ResampleUnit::Participants => {
                    let (mut sa, mut sb) = (Cell::default(), Cell::default());
                    for _ in 0..cl.len() {
                        let (x, y) = cl[r.random_range(0..cl.len())];
                        sa.hits += x.hits;
                        sa.n += x.n;
                        sb.hits += y.hits;
                        sb.n += y.n;
                    }
                    Some(sa.rate()? - sb.rate()?)
                }
            }
        })
        .collect()
}

fn compare_pair(
    records: &[MessageRecord],
    metric: Metric,
    treatment: ModelId,
    control: ModelId,
    unit: ResampleUnit,
    resamples: usize,
    seed: u64,
) -> ComparisonRow {
    let cl = clusters(records, metric, treatment, control);
    let sum = |f: fn(&(Cell, Cell)) -> Cell| {
        cl.iter().map(f).fold(Cell::default(), |acc, c| Cell {
            hits: acc.hits + c.hits,
            n: acc.n + c.n,
        })
    };
    let (a, b) = (sum(|c| c.0), sum(|c| c.1));
    let mut row = ComparisonRow {
        label: format!("{treatment}-{control}"),
        metric,
        n_treatment: a.n,
        n_control: b.n,
        treatment_rate: a.rate(),
        control_rate: b.rate(),
        mean_difference: None,
        percent_change: None,
        ci_low: None,
        ci_high: None,
        p_value: None,
        p_adjusted: None,
    };
    let (Some(ra), Some(rb)) = (a.rate(), b.rate()) else {
        return row;
    };
    let diff = ra - rb;
    let mut boot = bootstrap_differences(&cl, unit, resamples, seed);
    boot.sort_by(f64::total_cmp);
    row.mean_difference = Some(diff);
    row.percent_change = (rb > 0.0).then(|| 100.0 * diff / rb);
    if boot.is_empty() {
        return row;
    }
    // The CI always brackets the point estimate.
    row.ci_low = Some(percentile(&boot, 0.025).min(diff));
    row.ci_high = Some(percentile(&boot, 0.975).max(diff));
    let b = boot.len() as f64;
    let below = boot.iter().filter(|&&d| d <= 0.0).count() as f64;
    let above = boot.iter().filter(|&&d| d >= 0.0).count() as f64;
    row.p_value = Some((2.0 * ((below + 1.0) / (b + 1.0)).min((above + 1.0) / (b + 1.0))).min(1.0));
    row
}

/// Static and adaptive against control, in that order. Groups are by
/// attributed model. Rows whose groups are empty are left undefined.
pub fn compare_rates(
    records: &[MessageRecord],
    metric: Metric,
    unit: ResampleUnit,
    resamples: usize,
    seed: u64,
) -> Result<Vec<ComparisonRow>, EvalError> {
    if resamples == 0 {
        return Err(EvalError::NoResamples);
    }
    Ok([ModelId::Static, ModelId::Adaptive]
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let s = rng::derive_seed(seed, &[metric as u64, i as u64]);
            compare_pair(records, metric, t, ModelId::Control, unit, resamples, s)
        })
        .collect())
}

/// Benjamini-Hochberg step-up adjustment, returned in input order.
pub fn bh_adjust(p_values: &[f64]) -> Result<Vec<f64>, EvalError> {
    if let Some((index, &value)) = p_values
        .iter()
        .enumerate()
        .find(|(_, p)| !(0.0..=1.0).contains(*p))
    {
        return Err(EvalError::PValueOutOfRange { index, value });
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]));
    let mut adjusted = vec![0.0; m];
    let mut running = 1.0f64;
    for (rank, &i) in order.iter().enumerate().rev() {
        running = running
            .min(p_values[i] * m as f64 / (rank + 1) as f64)
            .min(1.0);
        adjusted[i] = running;
    }
    Ok(adjusted)
}

/// Fills `p_adjusted` across all defined rows jointly.
pub fn adjust_rows(rows: &mut [ComparisonRow]) -> Result<(), EvalError> {
    let idx: Vec<usize> = (0..rows.len())
        .filter(|&i| rows[i].p_value.is_some())
        .collect();
    let ps: Vec<f64> = idx.iter().filter_map(|&i| rows[i].p_value).collect();
    for (&i, adj) in idx.iter().zip(bh_adjust(&ps)?) {
        rows[i].p_adjusted = Some(adj);
    }
    Ok(())
}

pub const COMPARISON_CSV_HEADER: &str = "comparison,metric,n_treatment,n_control,treatment_rate,control_rate,mean_difference,percent_change,ci_low,ci_high,p_value,p_adjusted,formatted";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.6}"))
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut out = format!("{COMPARISON_CSV_HEADER}\n");
    for r in rows {
        let formatted = match (r.mean_difference, r.percent_change) {
            (Some(d), Some(p)) => format_difference(d, p),
            _ => "NA".to_string(),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.label,
            r.metric,
            r.n_treatment,
            r.n_control,
            opt(r.treatment_rate),
            opt(r.control_rate),
            opt(r.mean_difference),
            opt(r.percent_change),
            opt(r.ci_low),
            opt(r.ci_high),
            opt(r.p_value),
            opt(r.p_adjusted),
            formatted
        ));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DailyPoint {
    pub day: u32,
    pub rate: f64,
    pub n: u64,
}

/// Per attributed model, one point per study day that has messages.
pub fn daily_series(
    records: &[MessageRecord],
    metric: Metric,
) -> BTreeMap<ModelId, Vec<DailyPoint>> {
    let mut cells: BTreeMap<(ModelId, u32), Cell> = BTreeMap::new();
    for m in records {
        let c = cells
            .entry((m.delivery.model_attributed, m.delivery.day))
            .or_default();
        c.n += 1;
        c.hits += metric.hit(m) as u64;
    }
    let mut out: BTreeMap<ModelId, Vec<DailyPoint>> = BTreeMap::new();
    for ((model, day), c) in cells {
        out.entry(model).or_default().push(DailyPoint {
            day,
            rate: c.hits as f64 / c.n as f64,
            n: c.n,
        });
    }
    out
}

pub const SERIES_CSV_HEADER: &str = "model,day,rate,n";

pub fn series_csv(series: &BTreeMap<ModelId, Vec<DailyPoint>>) -> String {
    let mut out = format!("{SERIES_CSV_HEADER}\n");
    for (model, points) in series {
        for p in points {
            out.push_str(&format!("{model},{},{:.6},{}\n", p.day, p.rate, p.n));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trend {
    /// Rate change per day.
    pub slope: f64,
    /// Two-sided permutation p-value.
    pub p_value: f64,
    pub n_points: usize,
}

fn weighted_slope(days: &[f64], points: &[DailyPoint]) -> f64 {
    let w: Vec<f64> = points.iter().map(|p| p.n as f64).collect();
    let sw: f64 = w.iter().sum();
    let mean = |v: &mut dyn Iterator<Item = f64>| v.sum::<f64>() / sw;
    let dbar = mean(&mut days.iter().zip(&w).map(|(d, w)| d * w));
    let rbar = mean(&mut points.iter().zip(&w).map(|(p, w)| p.rate * w));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for ((d, p), w) in days.iter().zip(points).zip(&w) {
        sxy += w * (d - dbar) * (p.rate - rbar);
        sxx += w * (d - dbar) * (d - dbar);
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Weighted OLS slope of rate on day. The p-value permutes day labels
/// across points `permutations` times.
pub fn trend_slope(
    points: &[DailyPoint],
    permutations: usize,
    seed: u64,
) -> Result<Trend, EvalError> {
    let points: Vec<DailyPoint> = points.iter().copied().filter(|p| p.n > 0).collect();
    if points.len() < 3 {
        return Err(EvalError::TooFewPoints {
            found: points.len(),
        });
    }
    let days: Vec<f64> = points.iter().map(|p| p.day as f64).collect();
    let slope = weighted_slope(&days, &points);
    let tol = 1e-12 * slope.abs().max(1e-12);
    let extreme = (0..permutations)
        .into_par_iter()
        .filter(|&k| {
            let mut shuffled = days.clone();
            shuffled.shuffle(&mut rng::stream(seed, &[k as u64]));
            weighted_slope(&shuffled, &points).abs() >= slope.abs() - tol
        })
        .count();
    Ok(Trend {
        slope,
        p_value: (extreme as f64 + 1.0) / (permutations as f64 + 1.0),
        n_points: points.len(),
    })
}

/// Keeps points with `from <= day <= to`.
pub fn day_range(points: &[DailyPoint], from: u32, to: u32) -> Vec<DailyPoint> {
    points
        .iter()
        .copied()
        .filter(|p| (from..=to).contains(&p.day))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delivery::DeliveryRecord;
    use crate::features::{
        Activity, BatteryStatus, ContextSnapshot, DayType, LockState, TimeOfDay, Wifi,
    };
    use crate::labeling::OutcomeRecord;
    use proptest::prelude::*;
    use rand_distr::Normal;

    fn ctx() -> ContextSnapshot {
        ContextSnapshot::new(
            DayType::Weekday,
            TimeOfDay::Morning,
            BatteryStatus::Discharging,
            50,
            LockState::Locked,
            60,
            Wifi::Connected,
            Activity::Still,
        )
        .unwrap()
    }

    fn msg(participant: u32, day: u32, model: ModelId, jit: bool) -> MessageRecord {
        let ts = (day as i64 - 1) * 86_400 + 36_000;
        MessageRecord {
            replicate: 0,
            delivery: DeliveryRecord {
                participant,
                day,
                trigger_ts: ts,
                model_selected: model,
                model_attributed: model,
                delivery_ts: ts,
                attempts: 1,
                context: ctx(),
            },
            outcome: OutcomeRecord {
                delivery_ts: ts,
                first_response_ts: jit.then_some(ts + 60),
                reply_ts: if jit { vec![ts + 60] } else { vec![] },
                context_at_response: jit.then(ctx),
            },
        }
    }

    /// Bernoulli messages for `model` with exactly `round(rate * n)` hits,
    /// spread over 50 participants.
    fn group(model: ModelId, rate: f64, n: usize, seed: u64) -> Vec<MessageRecord> {
        let hits = (rate * n as f64).round() as usize;
        let mut labels: Vec<bool> = (0..n).map(|i| i < hits).collect();
        labels.shuffle(&mut rng::stream(seed, &[]));
        labels
            .into_iter()
            .enumerate()
            .map(|(i, j)| msg(i as u32 % 50, 1 + i as u32 % 21, model, j))
            .collect()
    }

    #[test]
    fn format_fixture() {
        assert_eq!(format_difference(0.108, 38.02), "+0.108 (+38.02%)");
        assert_eq!(format_difference(-0.02, -7.5), "-0.020 (-7.50%)");
    }

    #[test]
    fn identical_groups_straddle_zero() {
        let mut recs = group(ModelId::Static, 0.3, 400, 1);
        recs.extend(group(ModelId::Control, 0.3, 400, 2));
        for unit in [ResampleUnit::Messages, ResampleUnit::Participants] {
            let rows = compare_rates(&recs, Metric::JitResponse, unit, 2000, 4).unwrap();
            let r = &rows[0];
            assert_eq!(r.mean_difference, Some(0.0));
            assert!(
                r.ci_low.unwrap() < 0.0 && r.ci_high.unwrap() > 0.0,
                "{unit:?} {r:?}"
            );
            assert!(r.p_value.unwrap() > 0.5);
            assert!(!rows[1].is_defined(), "adaptive group is empty");
        }
    }

    #[test]
    fn large_difference_excludes_zero() {
        let mut recs = group(ModelId::Static, 0.8, 500, 2);
        recs.extend(group(ModelId::Control, 0.2, 500, 3));
        let r = &compare_rates(
            &recs,
            Metric::JitResponse,
            ResampleUnit::Messages,
            10_000,
            5,
        )
        .unwrap()[0];
        assert!((r.mean_difference.unwrap() - 0.6).abs() < 1e-12);
        assert!(r.excludes_zero());
        // Oracle: the standard error of a difference of two independent
        // proportions; the percentile interval should be close to +/-1.96 se.
        let se = (0.8f64 * 0.2 / 500.0 * 2.0).sqrt();
        assert!((r.ci_low.unwrap() - (0.6 - 1.96 * se)).abs() < 0.01);
        assert!((r.ci_high.unwrap() - (0.6 + 1.96 * se)).abs() < 0.01);
        assert!((r.percent_change.unwrap() - 300.0).abs() < 1e-9);
    }

    #[test]
    fn message_bootstrap_matches_literal_resampling() {
        let mut recs = group(ModelId::Static, 0.35, 300, 6);
        recs.extend(group(ModelId::Control, 0.25, 300, 7));
        let r = &compare_rates(
            &recs,
            Metric::JitResponse,
            ResampleUnit::Messages,
            10_000,
            1,
        )
        .unwrap()[0];
        // Literal per-message resampling oracle.
        let a: Vec<bool> = recs[..300]
            .iter()
            .map(|m| Metric::JitResponse.hit(m))
            .collect();
        let b: Vec<bool> = recs[300..]
            .iter()
            .map(|m| Metric::JitResponse.hit(m))
            .collect();
        let mut r2 = rng::stream(99, &[]);
        let mut diffs: Vec<f64> = (0..10_000)
            .map(|_| {
                let ra = (0..300).filter(|_| a[r2.random_range(0..300)]).count() as f64 / 300.0;
                let rb = (0..300).filter(|_| b[r2.random_range(0..300)]).count() as f64 / 300.0;
                ra - rb
            })
            .collect();
        diffs.sort_by(f64::total_cmp);
        assert!((percentile(&diffs, 0.025) - r.ci_low.unwrap()).abs() < 0.01);
        assert!((percentile(&diffs, 0.975) - r.ci_high.unwrap()).abs() < 0.01);
    }

    #[test]
    fn seeded_and_monte_carlo_error_shrinks() {
        let mut recs = group(ModelId::Static, 0.35, 300, 8);
        recs.extend(group(ModelId::Control, 0.25, 300, 9));
        let run = |b, s| {
            compare_rates(&recs, Metric::JitResponse, ResampleUnit::Participants, b, s).unwrap()[0]
                .clone()
        };
        assert_eq!(run(500, 3), run(500, 3));
        let spread = |b| {
            let lows: Vec<f64> = (0..20).map(|s| run(b, s).ci_low.unwrap()).collect();
            let m = lows.iter().sum::<f64>() / 20.0;
            lows.iter().map(|x| (x - m).powi(2)).sum::<f64>()
        };
        assert!(spread(10_000) < spread(1_000));
    }

    /// Literal definition: adj(i) = min over j >= rank(i) of min(1, p(j) m / j).
    fn bh_literal(p: &[f64]) -> Vec<f64> {
        let m = p.len();
        let mut sorted: Vec<f64> = p.to_vec();
        sorted.sort_by(f64::total_cmp);
        p.iter()
            .map(|&pi| {
                let rank = sorted.iter().position(|&s| s == pi).unwrap();
                (rank..m)
                    .map(|j| (sorted[j] * m as f64 / (j + 1) as f64).min(1.0))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    #[test]
    fn bh_examples() {
        assert_eq!(
            bh_adjust(&[0.01, 0.02, 0.03]).unwrap(),
            vec![0.03, 0.03, 0.03]
        );
        assert_eq!(bh_adjust(&[0.2]).unwrap(), vec![0.2]);
        assert_eq!(bh_adjust(&[0.5; 4]).unwrap(), vec![0.5; 4]);
        assert!(matches!(
            bh_adjust(&[0.1, 1.5]),
            Err(EvalError::PValueOutOfRange { index: 1, .. })
        ));
    }

    proptest! {
        #[test]
        fn bh_matches_literal(p in prop::collection::vec(0.0f64..=1.0, 1..=10)) {
            let adj = bh_adjust(&p).unwrap();
            let lit = bh_literal(&p);
            for ((a, l), pi) in adj.iter().zip(&lit).zip(&p) {
                prop_assert!((a - l).abs() < 1e-12);
                prop_assert!(*a >= *pi - 1e-15 && *a <= 1.0);
            }
        }
    }

    fn linear_series(slope: f64) -> Vec<DailyPoint> {
        (1..=21)
            .map(|d| DailyPoint {
                day: d,
                rate: 0.1 + slope * d as f64,
                n: 10 + d as u64,
            })
            .collect()
    }

    #[test]
    fn exact_and_flat_series() {
        let t = trend_slope(&linear_series(0.01), 200, 1).unwrap();
        assert!((t.slope - 0.01).abs() < 1e-12);
        let t = trend_slope(&linear_series(0.0), 200, 1).unwrap();
        assert!(t.slope.abs() < 1e-15);
        assert!(matches!(
            trend_slope(&linear_series(0.01)[..2], 10, 1),
            Err(EvalError::TooFewPoints { found: 2 })
        ));
    }

    #[test]
    fn recovers_noisy_slope() {
        let mut r = rng::stream(17, &[]);
        let points: Vec<DailyPoint> = (1..=21u32)
            .map(|d| {
                let p = 0.2 + 0.01 * d as f64;
                let hits = (0..200).filter(|_| r.random::<f64>() < p).count();
                DailyPoint {
                    day: d,
                    rate: hits as f64 / 200.0,
                    n: 200,
                }
            })
            .collect();
        let t = trend_slope(&points, DEFAULT_PERMUTATIONS, 3).unwrap();
        assert!((t.slope - 0.01).abs() <= 0.004, "{}", t.slope);
        assert!(t.p_value < 0.05);
    }

    #[test]
    fn permuted_trend_is_centered() {
        let base = linear_series(0.01);
        let mut r = rng::stream(5, &[]);
        let noise = Normal::new(0.0, 0.02).unwrap();
        let base: Vec<DailyPoint> = base
            .into_iter()
            .map(|p| DailyPoint {
                rate: p.rate + noise.sample(&mut r),
                ..p
            })
            .collect();
        let slopes: Vec<f64> = (0..100)
            .map(|_| {
                let mut days: Vec<u32> = base.iter().map(|p| p.day).collect();
                days.shuffle(&mut r);
                let permuted: Vec<DailyPoint> = base
                    .iter()
                    .zip(days)
                    .map(|(p, d)| DailyPoint { day: d, ..*p })
                    .collect();
                trend_slope(&permuted, 1, 0).unwrap().slope
            })
            .collect();
        let mean = slopes.iter().sum::<f64>() / 100.0;
        let sd = (slopes.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / 99.0).sqrt();
        assert!(mean.abs() <= 2.0 * sd / 10.0, "{mean} {sd}");
    }

    #[test]
    fn daily_series_partitions_messages() {
        let mut recs = group(ModelId::Static, 0.4, 210, 1);
        recs.extend(group(ModelId::Control, 0.3, 210, 2));
        let s = daily_series(&recs, Metric::JitResponse);
        assert!(!s.contains_key(&ModelId::Adaptive));
        let total: u64 = s.values().flatten().map(|p| p.n).sum();
        assert_eq!(total, 420);
        for p in s.values().flatten() {
            assert!((0.0..=1.0).contains(&p.rate));
        }
        let one = daily_series(&recs[..1], Metric::JitResponse);
        assert_eq!(one.values().flatten().count(), 1);
        assert!(series_csv(&s).starts_with(SERIES_CSV_HEADER));
    }

    #[test]
    fn adjusted_rows_and_csv() {
        let mut recs = group(ModelId::Static, 0.5, 300, 1);
        recs.extend(group(ModelId::Control, 0.3, 300, 2));
        let mut rows =
            compare_rates(&recs, Metric::JitResponse, ResampleUnit::Messages, 1000, 1).unwrap();
        adjust_rows(&mut rows).unwrap();
        assert!(rows[0].p_adjusted.is_some() && rows[1].p_adjusted.is_none());
        let csv = comparison_csv(&rows);
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().nth(2).unwrap().contains("NA"));
    }
}
