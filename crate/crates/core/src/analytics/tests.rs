use super::*;
use crate::backtest::{BacktestConfig, DayRecord};
use crate::selection::{SelectedPair, SelectionMethod};
use crate::pair_stats::{DateWindow, FitSummary};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn day(n: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(2020, 1, 1).unwrap() + chrono::Duration::days(n as i64)
}

// Reference values from numpy (ddof=1) and scipy.stats.skew.
#[test]
fn fixture_matches_reference() {
    let r = [0.01, -0.02, 0.03, -0.01, 0.005];
    let p = performance(&r).unwrap();
    assert!((p.sharpe - 2.475829099459356).abs() < 1e-9);
    assert!((p.sortino.unwrap() - 6.734983296193093).abs() < 1e-9);
    assert!((p.cumulative_return - 0.014345555299999813).abs() < 1e-9);
    assert!((p.annualized_return - 1.050080425455786).abs() < 1e-9);
    assert!((p.skew - 0.22267706475589705).abs() < 1e-9);
    assert!((p.max_drawdown + 0.02).abs() < 1e-9);
    assert_eq!(p.min_day, -0.02);
    assert_eq!(p.max_day, 0.03);
}

#[test]
fn constant_positive_return() {
    // A constant series has zero spread, so add a tiny ripple that keeps it
    // strictly positive and monotone.
    let n = 100;
    let r: Vec<f64> = (0..n).map(|i| 0.001 + if i % 2 == 0 { 1e-6 } else { -1e-6 }).collect();
    let p = performance(&r).unwrap();
    assert_eq!(p.max_drawdown, 0.0);
    assert!(p.sortino.is_none());
    let expect: f64 = r.iter().map(|x| 1.0 + x).product::<f64>() - 1.0;
    assert!((p.cumulative_return - expect).abs() < 1e-9);

    let flat = vec![0.001; n];
    assert!(matches!(performance(&flat), Err(Error::Degenerate(_))));
    assert!((cumulative_return(&flat) - (1.001f64.powi(n as i32) - 1.0)).abs() < 1e-9);
    assert_eq!(max_drawdown(&flat), 0.0);
}

#[test]
fn drawdown_single_trough() {
    assert!((max_drawdown(&[0.10, -0.50, 0.10]) + 0.5).abs() < 1e-9);
    let p = performance(&[0.10, -0.50, 0.10]).unwrap();
    assert!((p.max_drawdown + 0.5).abs() < 1e-9);
    // Loss from the start counts against the initial 1.0.
    assert!((max_drawdown(&[-0.1, 0.05]) + 0.1).abs() < 1e-12);
}

#[test]
fn short_or_bad_series_rejected() {
    assert!(matches!(performance(&[0.01]), Err(Error::InsufficientData(_))));
    assert!(performance(&[0.01, f64::NAN]).is_err());
}

#[test]
fn sortino_needs_two_negative_days() {
    let p = performance(&[0.01, 0.02, -0.01, 0.03]).unwrap();
    assert!(p.sortino.is_none());
}

#[test]
fn sharpe_sampling_distribution() {
    let (mu, sigma, n) = (0.0005, 0.01, 504usize);
    let target = mu / sigma * TRADING_DAYS.sqrt();
    let sr_d = mu / sigma;
    let se = ((1.0 + 0.5 * sr_d * sr_d) / n as f64).sqrt() * TRADING_DAYS.sqrt();
    let normal = Normal::new(mu, sigma).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let trials = 1000;
    let mut inside = 0;
    let mut total = 0.0;
    for _ in 0..trials {
        let r: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
        let s = performance(&r).unwrap().sharpe;
        total += s;
        if (s - target).abs() <= 3.0 * se {
            inside += 1;
        }
    }
    assert!(inside >= 985, "{inside} of {trials} within 3 SE");
    let avg = total / trials as f64;
    assert!((avg - target).abs() < 3.0 * se / (trials as f64).sqrt(), "mean {avg} vs {target}");
}

#[test]
fn markdown_has_table_rows() {
    let p = performance(&[0.01, -0.02, 0.03, -0.01, 0.005]).unwrap();
    let md = performance_table_markdown(ReturnBasis::Net, &[("MZ".into(), p), ("BZ".into(), p)]);
    for label in [
        "Net Sharpe ratio",
        "Net Sortino ratio",
        "Net cumulative returns (%)",
        "Net annualized returns (%)",
        "Minimum net single day return (%)",
        "Maximum net single day return (%)",
        "Skew",
        "Drawdown (%)",
    ] {
        assert!(md.contains(&format!("| {label} |")), "{label}");
    }
    assert!(md.starts_with("| | MZ | BZ |"));
    assert!(md.contains("| Drawdown (%) | -2.00 | -2.00 |"));
}

fn record(n: u32, positions: &[(&str, f64)]) -> DayRecord {
    DayRecord {
        date: day(n),
        realized_on: day(n + 1),
        rebalance: false,
        pairs: vec![],
        positions: positions.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        gross_return: 0.0,
        fees: 0.0,
        net_return: 0.0,
    }
}

fn ledger(days: Vec<DayRecord>) -> DailyLedger {
    DailyLedger { config: BacktestConfig::default(), days, selections: vec![] }
}

#[test]
fn turnover_examples() {
    let l = ledger(vec![
        record(0, &[]),
        record(1, &[("i", 1.0), ("j", -1.0)]),
        record(2, &[("i", 1.0), ("j", -1.0)]),
        record(3, &[("i", -1.0), ("j", 1.0)]),
    ]);
    assert_eq!(turnover(&l, day(0)).unwrap(), 0.0);
    assert!((turnover(&l, day(1)).unwrap() - 2.0).abs() < 1e-9);
    assert_eq!(turnover(&l, day(2)).unwrap(), 0.0);
    assert!((turnover(&l, day(3)).unwrap() - 4.0).abs() < 1e-9);
    assert!(turnover(&l, day(9)).is_err());
    let series: Vec<f64> = turnover_series(&l).into_iter().map(|x| x.1).collect();
    assert_eq!(series, vec![0.0, 2.0, 0.0, 4.0]);

    // First day counts as opening from flat.
    let l = ledger(vec![record(0, &[("a", 0.5), ("b", -0.25)])]);
    assert!((turnover(&l, day(0)).unwrap() - 0.75).abs() < 1e-12);
}

fn sel(pairs: &[(&str, &str)]) -> PortfolioSelection {
    let fit = FitSummary { beta: 1.0, mu: 0.0, residual_std: 1.0, window: DateWindow::new(0, 30) };
    PortfolioSelection {
        method: SelectionMethod::Matching,
        pairs: pairs
            .iter()
            .map(|(a, b)| SelectedPair {
                ticker_i: a.to_string(),
                ticker_j: b.to_string(),
                weight: 1.0,
                t_stat: -5.0,
                p_value: 1e-4,
                fit,
            })
            .collect(),
        as_of: day(0),
    }
}

#[test]
fn retention_examples() {
    let ab_cd = sel(&[("a", "b"), ("c", "d")]);
    assert_eq!(retention(&ab_cd, &ab_cd), 1.0);
    assert_eq!(retention(&ab_cd, &sel(&[("e", "f")])), 0.0);
    assert!((retention(&ab_cd, &sel(&[("a", "b"), ("e", "f")])) - 1.0 / 3.0).abs() < 1e-9);
    assert_eq!(retention(&sel(&[]), &sel(&[])), 1.0);
    // Pair identity ignores orientation.
    assert_eq!(retention(&sel(&[("a", "b")]), &sel(&[("b", "a")])), 1.0);
}

#[test]
fn concentration_examples() {
    let series = concentration_series(&[sel(&[("a", "b"), ("c", "d")]), sel(&[]), sel(&[("a", "b"), ("a", "c")])]);
    let counts: Vec<usize> = series.into_iter().map(|x| x.1).collect();
    assert_eq!(counts, vec![1, 0, 2]);
}

fn ss(name: &str, r: Vec<f64>) -> StrategySeries {
    let dates = (0..r.len() as u32).map(day).collect();
    StrategySeries::new(name, dates, r)
}

#[test]
fn correlation_examples() {
    let x = vec![0.01, -0.02, 0.03, -0.01, 0.005];
    let neg: Vec<f64> = x.iter().map(|v| -v).collect();
    let c = strategy_correlation(&[ss("A", x.clone()), ss("B", x.clone()), ss("C", neg)]).unwrap();
    assert!((c.get("A", "B").unwrap() - 1.0).abs() < 1e-12);
    assert!((c.get("A", "C").unwrap() + 1.0).abs() < 1e-12);
    assert_eq!(c.values[1][1], 1.0);

    let mut shifted = ss("D", x.clone());
    shifted.dates[0] = day(100);
    assert!(matches!(strategy_correlation(&[ss("A", x.clone()), shifted]), Err(Error::InvalidParameter(_))));
    assert!(matches!(
        strategy_correlation(&[ss("A", x), ss("Z", vec![0.0; 5])]),
        Err(Error::Degenerate(_))
    ));
}

#[test]
fn independent_series_have_small_correlation() {
    let n = 500;
    let bound = 4.0 / (n as f64).sqrt();
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let trials = 400;
    let mut inside = 0;
    for _ in 0..trials {
        let a: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
        let b: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
        let c = strategy_correlation(&[ss("a", a), ss("b", b)]).unwrap();
        if c.values[0][1].abs() < bound {
            inside += 1;
        }
    }
    assert!(inside as f64 >= 0.95 * trials as f64);
}

fn min_eigenvalue(m: &[Vec<f64>]) -> f64 {
    let k = m.len();
    let mat = nalgebra::DMatrix::from_fn(k, k, |i, j| m[i][j]);
    mat.symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

#[test]
fn capital_normalization_divides_by_pairs() {
    let mut d = record(0, &[]);
    d.gross_return = 0.3;
    d.net_return = 0.2;
    let pd = crate::backtest::PairDay {
        signal: crate::backtest::SignalRecord {
            date: day(0),
            ticker_i: "a".into(),
            ticker_j: "b".into(),
            raw_score: None,
            signal: 0,
        },
        beta: None,
        position_i: 0.0,
        position_j: 0.0,
        gross_return: 0.0,
        fee: 0.0,
        net_return: 0.0,
        forced_flat: false,
    };
    d.pairs = vec![pd.clone(), pd.clone(), pd];
    let l = ledger(vec![d, record(1, &[])]);
    let g = capital_normalized_returns(&l, ReturnBasis::Gross);
    assert!((g[0] - 0.1).abs() < 1e-15);
    assert_eq!(g[1], 0.0);
    let n = capital_normalized_returns(&l, ReturnBasis::Net);
    assert!((n[0] - 0.2 / 3.0).abs() < 1e-15);
}

fn series_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.05f64..0.05, 10..80)
        .prop_filter("needs spread", |v| v.iter().any(|x| (x - v[0]).abs() > 1e-4))
}

proptest! {
    #[test]
    fn scale_invariant_ratios(r in series_strategy(), c in 0.1f64..10.0) {
        let scaled: Vec<f64> = r.iter().map(|x| x * c).collect();
        let a = performance(&r).unwrap();
        let b = performance(&scaled).unwrap();
        prop_assert!((a.sharpe - b.sharpe).abs() < 1e-9);
        prop_assert!((a.skew - b.skew).abs() < 1e-9);
        match (a.sortino, b.sortino) {
            (Some(x), Some(y)) => prop_assert!((x - y).abs() < 1e-9 * x.abs().max(1.0)),
            (None, None) => {}
            _ => prop_assert!(false, "sortino presence changed"),
        }
        prop_assert!((b.min_day - c * a.min_day).abs() < 1e-12);
        prop_assert!((b.max_day - c * a.max_day).abs() < 1e-12);
        prop_assert!(a.min_day <= a.max_day);
        prop_assert!(a.max_drawdown <= 0.0);
    }

    #[test]
    fn retention_symmetric(a in prop::collection::btree_set((0u8..5, 0u8..5), 0..6),
                           b in prop::collection::btree_set((0u8..5, 0u8..5), 0..6)) {
        let to_sel = |s: &std::collections::BTreeSet<(u8, u8)>| {
            let names: Vec<(String, String)> = s
                .iter()
                .filter(|(x, y)| x < y)
                .map(|(x, y)| (format!("t{x}"), format!("t{y}")))
                .collect();
            let refs: Vec<(&str, &str)> = names.iter().map(|(x, y)| (x.as_str(), y.as_str())).collect();
            sel(&refs)
        };
        let (sa, sb) = (to_sel(&a), to_sel(&b));
        let r = retention(&sa, &sb);
        prop_assert_eq!(r, retention(&sb, &sa));
        prop_assert!((0.0..=1.0).contains(&r));
        prop_assert_eq!(r == 1.0, pair_set(&sa) == pair_set(&sb));
    }

    #[test]
    fn turnover_nonnegative(p in prop::collection::vec((0u8..6, -3.0f64..3.0), 0..6),
                            q in prop::collection::vec((0u8..6, -3.0f64..3.0), 0..6)) {
        let to_map = |v: &Vec<(u8, f64)>| -> BTreeMap<String, f64> {
            v.iter().map(|(k, x)| (format!("t{k}"), *x)).filter(|(_, x)| *x != 0.0).collect()
        };
        let (a, b) = (to_map(&p), to_map(&q));
        let t = position_change(&a, &b);
        prop_assert!(t >= 0.0);
        prop_assert_eq!(t == 0.0, a == b);
    }

    #[test]
    fn correlation_is_psd(seed in 0u64..1000, k in 2usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let common: Vec<f64> = (0..60).map(|_| normal.sample(&mut rng)).collect();
        let series: Vec<StrategySeries> = (0..k)
            .map(|s| {
                let r = common.iter().map(|c| c * (s as f64 - 1.5) + normal.sample(&mut rng)).collect();
                ss(&format!("s{s}"), r)
            })
            .collect();
        let c = strategy_correlation(&series).unwrap();
        for i in 0..k {
            prop_assert_eq!(c.values[i][i], 1.0);
            for j in 0..k {
                prop_assert_eq!(c.values[i][j], c.values[j][i]);
            }
        }
        prop_assert!(min_eigenvalue(&c.values) >= -1e-9);
    }
}
