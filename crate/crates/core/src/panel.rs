//! Dense dates x tickers price panel and its long-format CSV form.
//!
//! The CSV schema is one observation per row with header
//! `date,ticker,adj_close`; dates are ISO-8601 (`YYYY-MM-DD`). Cells absent
//! from the file stay missing in the panel; nothing is filled.

use crate::error::{Error, Result};
use chrono::NaiveDate;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{Read, Write};
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct PricePanel {
    dates: Vec<NaiveDate>,
    tickers: Vec<String>,
    /// `prices[ticker][date]`; NaN marks a missing cell.
    prices: Vec<Vec<f64>>,
    index: HashMap<String, usize>,
}

impl PricePanel {
    /// Build a panel from per-ticker series (NaN = missing).
    pub fn new(dates: Vec<NaiveDate>, tickers: Vec<String>, prices: Vec<Vec<f64>>) -> Result<Self> {
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("dates must be strictly increasing".into()));
        }
        if prices.len() != tickers.len() {
            return Err(Error::InvalidParameter(format!(
                "{} tickers but {} price series",
                tickers.len(),
                prices.len()
            )));
        }
        let mut index = HashMap::with_capacity(tickers.len());
        for (i, t) in tickers.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::InvalidParameter(format!("duplicate ticker {t}")));
            }
        }
        for (t, series) in tickers.iter().zip(&prices) {
            if series.len() != dates.len() {
                return Err(Error::InvalidParameter(format!(
                    "{t} has {} prices for {} dates",
                    series.len(),
                    dates.len()
                )));
            }
            if let Some((d, &p)) = series.iter().enumerate().find(|(_, p)| !p.is_nan() && !(**p > 0.0 && p.is_finite())) {
                return Err(Error::NonPositivePrice { ticker: t.clone(), date: dates[d].to_string(), price: p });
            }
        }
        Ok(PricePanel { dates, tickers, prices, index })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn n_dates(&self) -> usize {
        self.dates.len()
    }

    pub fn n_tickers(&self) -> usize {
        self.tickers.len()
    }

    pub fn ticker_index(&self, ticker: &str) -> Option<usize> {
        self.index.get(ticker).copied()
    }

    /// Full price series of one ticker (NaN where missing).
    pub fn series(&self, ticker: usize) -> &[f64] {
        &self.prices[ticker]
    }

    pub fn price(&self, ticker: usize, date: usize) -> Option<f64> {
        let p = self.prices[ticker][date];
        (!p.is_nan()).then_some(p)
    }

    /// Whether `ticker` has a price on every date in `start..end`.
    pub fn is_complete(&self, ticker: usize, start: usize, end: usize) -> bool {
        self.prices[ticker][start..end].iter().all(|p| !p.is_nan())
    }

    /// Number of non-missing cells.
    pub fn observation_count(&self) -> usize {
        self.prices.iter().flatten().filter(|p| !p.is_nan()).count()
    }

    /// Index of the last date `<= date`, if any.
    pub fn date_position(&self, date: NaiveDate) -> Option<usize> {
        match self.dates.binary_search(&date) {
            Ok(i) => Some(i),
            Err(0) => None,
            Err(i) => Some(i - 1),
        }
    }

    /// Panel restricted to dates `start..end`.
    pub fn slice_dates(&self, start: usize, end: usize) -> PricePanel {
        PricePanel {
            dates: self.dates[start..end].to_vec(),
            tickers: self.tickers.clone(),
            prices: self.prices.iter().map(|s| s[start..end].to_vec()).collect(),
            index: self.index.clone(),
        }
    }

    /// Panel restricted to the given tickers, in the given order.
    pub fn select_tickers(&self, tickers: &[String]) -> Result<PricePanel> {
        let mut prices = Vec::with_capacity(tickers.len());
        for t in tickers {
            let i = self.ticker_index(t).ok_or_else(|| Error::UnknownTicker(t.clone()))?;
            prices.push(self.prices[i].clone());
        }
        PricePanel::new(self.dates.clone(), tickers.to_vec(), prices)
    }

    /// Write the panel in long CSV form, rows ordered by date then ticker.
    /// Prices use the shortest representation that parses back exactly.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["date", "ticker", "adj_close"]).map_err(io)?;
        let mut order: Vec<usize> = (0..self.tickers.len()).collect();
        order.sort_by(|&a, &b| self.tickers[a].cmp(&self.tickers[b]));
        for (d, date) in self.dates.iter().enumerate() {
            let ds = date.format("%Y-%m-%d").to_string();
            for &t in &order {
                let p = self.prices[t][d];
                if !p.is_nan() {
                    w.write_record([ds.as_str(), self.tickers[t].as_str(), &p.to_string()]).map_err(io)?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv_path(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    /// Parse long-format CSV. Tickers are sorted lexicographically; dates
    /// cover the union of all dates in the file.
    pub fn read_csv<R: Read>(input: R) -> Result<PricePanel> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
        let header = rdr.headers().map_err(|e| Error::Csv { line: 1, message: e.to_string() })?;
        let expected = ["date", "ticker", "adj_close"];
        if header.len() != 3 || header.iter().zip(expected).any(|(h, e)| h != e) {
            return Err(Error::Csv {
                line: 1,
                message: format!("expected header `date,ticker,adj_close`, found `{}`", header.iter().collect::<Vec<_>>().join(",")),
            });
        }
        let mut cells: BTreeMap<(String, NaiveDate), (f64, u64)> = BTreeMap::new();
        let mut dates = BTreeSet::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Csv {
                line: e.position().map(|p| p.line()).unwrap_or(0),
                message: e.to_string(),
            })?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            let bad = |message: String| Error::Csv { line, message };
            if rec.len() != 3 {
                return Err(bad(format!("expected 3 fields, found {}", rec.len())));
            }
            let date = NaiveDate::parse_from_str(&rec[0], "%Y-%m-%d")
                .map_err(|e| bad(format!("bad date `{}`: {e}", &rec[0])))?;
            let ticker = rec[1].to_string();
            if ticker.is_empty() {
                return Err(bad("empty ticker".into()));
            }
            let price: f64 = rec[2].parse().map_err(|_| bad(format!("bad price `{}`", &rec[2])))?;
            if !(price.is_finite() && price > 0.0) {
                return Err(bad(format!("non-positive price {price} for {ticker} on {date}")));
            }
            if let Some((_, first)) = cells.get(&(ticker.clone(), date)) {
                return Err(bad(format!("duplicate row for ({date}, {ticker}); first seen on line {first}")));
            }
            cells.insert((ticker, date), (price, line));
            dates.insert(date);
        }
        let dates: Vec<NaiveDate> = dates.into_iter().collect();
        let date_pos: HashMap<NaiveDate, usize> = dates.iter().enumerate().map(|(i, d)| (*d, i)).collect();
        let mut tickers: Vec<String> = Vec::new();
        let mut prices: Vec<Vec<f64>> = Vec::new();
        for ((ticker, date), (price, _)) in cells {
            if tickers.last() != Some(&ticker) {
                tickers.push(ticker);
                prices.push(vec![f64::NAN; dates.len()]);
            }
            prices.last_mut().expect("pushed above")[date_pos[&date]] = price;
        }
        PricePanel::new(dates, tickers, prices)
    }

    pub fn read_csv_path(path: &Path) -> Result<PricePanel> {
        let f = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::read_csv(std::io::BufReader::new(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    #[test]
    fn complete_file_gives_dense_panel() {
        let csv = "date,ticker,adj_close\n\
                   2021-01-04,AAA,10.5\n2021-01-04,BBB,20\n\
                   2021-01-05,AAA,10.7\n2021-01-05,BBB,19.5\n\
                   2021-01-06,BBB,19.9\n2021-01-06,AAA,10.1\n";
        let p = PricePanel::read_csv(csv.as_bytes()).unwrap();
        assert_eq!(p.n_dates(), 3);
        assert_eq!(p.n_tickers(), 2);
        assert_eq!(p.tickers(), &["AAA".to_string(), "BBB".to_string()]);
        assert_eq!(p.price(1, 2), Some(19.9));
        assert_eq!(p.observation_count(), 6);
    }

    #[test]
    fn missing_cells_stay_missing() {
        let csv = "date,ticker,adj_close\n2021-01-04,AAA,1\n2021-01-04,BBB,2\n2021-01-05,AAA,1.1\n";
        let p = PricePanel::read_csv(csv.as_bytes()).unwrap();
        assert_eq!(p.price(1, 1), None);
        assert!(!p.is_complete(1, 0, 2));
        assert!(p.is_complete(0, 0, 2));
        assert_eq!(p.observation_count(), 3);
    }

    #[test]
    fn duplicate_row_names_the_line() {
        let csv = "date,ticker,adj_close\n2021-01-04,AAA,1\n2021-01-05,AAA,2\n2021-01-04,AAA,1\n";
        match PricePanel::read_csv(csv.as_bytes()) {
            Err(Error::Csv { line, message }) => {
                assert_eq!(line, 4);
                assert!(message.contains("duplicate"), "{message}");
                assert!(message.contains("line 2"), "{message}");
            }
            other => panic!("expected csv error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_rows_are_rejected_with_line_numbers() {
        let cases = [
            ("date,ticker,adj_close\n2021-01-04,AAA,0\n", 2),
            ("date,ticker,adj_close\n2021-01-04,AAA,1\n2021-13-04,AAA,1\n", 3),
            ("date,ticker,adj_close\n2021-01-04,AAA,abc\n", 2),
            ("date,ticker,adj_close\n2021-01-04,AAA,-3\n", 2),
            ("date,ticker,price\n2021-01-04,AAA,3\n", 1),
        ];
        for (csv, want) in cases {
            match PricePanel::read_csv(csv.as_bytes()) {
                Err(Error::Csv { line, .. }) => assert_eq!(line, want, "{csv}"),
                other => panic!("expected csv error for {csv:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn constructor_checks_invariants() {
        let dates = vec![d("2021-01-05"), d("2021-01-04")];
        assert!(PricePanel::new(dates, vec!["A".into()], vec![vec![1.0, 1.0]]).is_err());
        let dates = vec![d("2021-01-04"), d("2021-01-05")];
        assert!(PricePanel::new(dates.clone(), vec!["A".into()], vec![vec![1.0, -1.0]]).is_err());
        assert!(PricePanel::new(dates.clone(), vec!["A".into(), "A".into()], vec![vec![1.0; 2]; 2]).is_err());
        assert!(PricePanel::new(dates, vec!["A".into()], vec![vec![1.0; 3]]).is_err());
    }

    #[test]
    fn write_then_read_is_identical() {
        let dates = vec![d("2021-01-04"), d("2021-01-05"), d("2021-01-06")];
        let panel = PricePanel::new(
            dates,
            vec!["ZZ".into(), "AA".into()],
            vec![vec![1.0 / 3.0, f64::NAN, 123.456_789_012_345_67], vec![2.0, 2.5, 1e-3]],
        )
        .unwrap();
        let mut buf = Vec::new();
        panel.write_csv(&mut buf).unwrap();
        let back = PricePanel::read_csv(buf.as_slice()).unwrap();
        let reordered = panel.select_tickers(&["AA".into(), "ZZ".into()]).unwrap();
        assert_eq!(back.tickers(), reordered.tickers());
        for t in 0..2 {
            for (a, b) in back.series(t).iter().zip(reordered.series(t)) {
                assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()));
            }
        }
    }

    #[test]
    fn date_lookup() {
        let dates = vec![d("2021-01-04"), d("2021-01-06")];
        let p = PricePanel::new(dates, vec!["A".into()], vec![vec![1.0, 2.0]]).unwrap();
        assert_eq!(p.date_position(d("2021-01-03")), None);
        assert_eq!(p.date_position(d("2021-01-05")), Some(0));
        assert_eq!(p.date_position(d("2021-01-06")), Some(1));
        assert_eq!(p.date_position(d("2022-01-01")), Some(1));
    }
}
