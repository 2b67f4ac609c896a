//! End-to-end checks on synthetic universes: selection structure, backtest
//! returns, and the gross/net split.

use pairmatch::analytics::{concentration_series, performance};
use pairmatch::backtest::{monthly_graphs, run_backtest, run_backtest_with_graphs, BacktestConfig};
use pairmatch::pair_stats::{adf_single_lag, fit_pair, DateWindow, ScoreKind, SignificanceLevel};
use pairmatch::portfolio_theory::{count_shared_pairs, er_expected_shared_pairs};
use pairmatch::selection::{baseline_topk, build_pairs_graph, max_weight_matching, SelectionMethod};
use pairmatch::synthetic::{generate, ticker_name, PlantedPair, UniverseSpec};

fn universe(n_stocks: usize, n_days: usize, seed: u64, pairs: Vec<PlantedPair>) -> UniverseSpec {
    UniverseSpec {
        drift_range: (-0.0005, 0.0005),
        noise_range: (0.015, 0.02),
        allow_shared_leaders: true,
        ..UniverseSpec::independent(n_stocks, n_days, 0.0, 0.02, seed)
    }
    .with_pairs(pairs)
}

/// Hub `hub` with followers `hub+1 ..= hub+n` at spread `sigma`.
fn cluster(hub: usize, n: usize, sigma: f64) -> Vec<PlantedPair> {
    (1..=n).map(|f| PlantedPair { leader: hub, follower: hub + f, sigma_spread: sigma }).collect()
}

#[test]
fn planted_spreads_reject_unit_root() {
    let trials = 100;
    let mut below = 0;
    for seed in 0..trials {
        let spec = universe(2, 504, seed, vec![PlantedPair { leader: 0, follower: 1, sigma_spread: 0.0711 }]);
        let panel = generate(&spec).unwrap();
        let fit = fit_pair(&panel, &ticker_name(0, 2), &ticker_name(1, 2), DateWindow::new(0, 504)).unwrap();
        let adf = adf_single_lag(&fit.residuals).unwrap();
        if adf.rejects_at(SignificanceLevel::One) {
            below += 1;
        }
    }
    assert!(below >= 95, "{below} of {trials}");
}

#[test]
fn clustered_statistics_concentrate_baseline() {
    // Five hubs with 15 tight followers each; the remaining 420 stocks are
    // independent walks.
    let mut pairs = Vec::new();
    for h in 0..5 {
        pairs.extend(cluster(h * 16, 15, 0.005));
    }
    let panel = generate(&universe(500, 504, 7, pairs)).unwrap();
    let graph = build_pairs_graph(&panel, DateWindow::new(0, 504), panel.tickers()).unwrap();
    assert_eq!(graph.edges.len(), 500 * 499 / 2);

    let base = baseline_topk(&graph, 250).unwrap();
    let shared = count_shared_pairs(&base.ticker_pairs()).unwrap() as f64;
    let er = er_expected_shared_pairs(500, 0.002).unwrap();
    assert!(shared > 2.0 * er, "shared {shared} vs random-graph {er}");

    let matched = max_weight_matching(&graph);
    assert_eq!(count_shared_pairs(&matched.ticker_pairs()).unwrap(), 0);
}

#[test]
fn concentration_series_by_method() {
    let mut pairs = vec![
        PlantedPair { leader: 0, follower: 1, sigma_spread: 0.0711 },
        PlantedPair { leader: 2, follower: 3, sigma_spread: 0.0711 },
    ];
    pairs.extend(cluster(4, 9, 0.005));
    let panel = generate(&universe(20, 504 + 130, 3, pairs)).unwrap();
    let graphs = monthly_graphs(&panel, 504).unwrap();
    let sel = |method| -> Vec<_> {
        graphs
            .iter()
            .map(|g| {
                let g = g.graph.as_ref().unwrap();
                match method {
                    SelectionMethod::Matching => max_weight_matching(g),
                    SelectionMethod::Baseline => baseline_topk(g, 10).unwrap(),
                }
            })
            .collect()
    };
    let matching = concentration_series(&sel(SelectionMethod::Matching));
    assert!(matching.len() >= 5);
    assert!(matching.iter().all(|(_, c)| *c == 1));
    let baseline = concentration_series(&sel(SelectionMethod::Baseline));
    let mean = baseline.iter().map(|(_, c)| *c as f64).sum::<f64>() / baseline.len() as f64;
    assert!(mean >= 3.0, "baseline mean concentration {mean}");
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

#[test]
fn independent_walks_earn_nothing_on_average() {
    let config = BacktestConfig { lookback_days: 252, k_target: 6, ..Default::default() };
    let means: Vec<f64> = (0..200)
        .map(|seed| {
            let panel = generate(&universe(12, 252 + 45, 1000 + seed, vec![])).unwrap();
            let l = run_backtest(&panel, &config).unwrap();
            let g = l.gross_returns();
            g.iter().sum::<f64>() / g.len() as f64
        })
        .collect();
    let (m, se) = mean_and_se(&means);
    assert!(m.abs() <= 3.0 * se, "mean {m} se {se}");
}

#[test]
fn planted_pairs_earn_positive_gross() {
    let pairs = (0..5).map(|p| PlantedPair { leader: 2 * p, follower: 2 * p + 1, sigma_spread: 0.0711 }).collect::<Vec<_>>();
    let config = BacktestConfig { lookback_days: 252, ..Default::default() };
    let means: Vec<f64> = (0..100)
        .map(|seed| {
            let panel = generate(&universe(14, 252 + 45, seed, pairs.clone())).unwrap();
            let l = run_backtest(&panel, &config).unwrap();
            let g = l.gross_returns();
            g.iter().sum::<f64>() / g.len() as f64
        })
        .collect();
    let (m, se) = mean_and_se(&means);
    assert!(m > 3.0 * se, "mean {m} se {se}");
    assert!(means.iter().filter(|x| **x > 0.0).count() >= 90);
}

#[test]
fn fees_split_baseline_from_matching() {
    // One wide profitable pair next to a cluster whose spreads are so tight
    // that each trade earns less than the daily fee.
    let mut pairs = vec![PlantedPair { leader: 0, follower: 1, sigma_spread: 0.0711 }];
    pairs.extend(cluster(2, 13, 1e-5));
    let tickers = |t: &[(String, String)]| t.iter().any(|(a, b)| a == &ticker_name(0, 16) && b == &ticker_name(1, 16));

    let mut checked = 0;
    for seed in 0..20 {
        let panel = generate(&universe(16, 504 + 130, seed, pairs.clone())).unwrap();
        let graphs = monthly_graphs(&panel, 504).unwrap();
        let baseline_cfg = BacktestConfig {
            selection_method: SelectionMethod::Baseline,
            signal_kind: ScoreKind::ZScore,
            k_target: 8,
            ..Default::default()
        };
        let base = run_backtest_with_graphs(&panel, &baseline_cfg, &graphs).unwrap();
        if base.selections.iter().any(|s| tickers(&s.ticker_pairs())) {
            continue;
        }
        let matching_cfg = BacktestConfig { selection_method: SelectionMethod::Matching, ..baseline_cfg };
        let mat = run_backtest_with_graphs(&panel, &matching_cfg, &graphs).unwrap();
        assert!(mat.selections.iter().all(|s| tickers(&s.ticker_pairs())));

        let b_gross = performance(&base.gross_returns()).unwrap();
        let b_net = performance(&base.net_returns()).unwrap();
        let m_net = performance(&mat.net_returns()).unwrap();
        assert!(b_gross.annualized_return > 0.0, "seed {seed}: baseline gross {}", b_gross.annualized_return);
        assert!(b_net.annualized_return < 0.0, "seed {seed}: baseline net {}", b_net.annualized_return);
        assert!(m_net.annualized_return > 0.0, "seed {seed}: matching net {}", m_net.annualized_return);
        checked += 1;
        if checked == 3 {
            break;
        }
    }
    assert_eq!(checked, 3);
}
