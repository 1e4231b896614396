use crate::error::{Error, Result};
use crate::table::{float17, CsvTable};

/// Timestamped prices with optional volumes and session opens.
///
/// Timestamps are epoch milliseconds. `level` counts how many block
/// renormalizations produced the series (0 = raw data).
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    timestamps: Vec<i64>,
    prices: Vec<f64>,
    volumes: Option<Vec<f64>>,
    opens: Option<Vec<f64>>,
    level: usize,
}

fn positive_prices(name: &'static str, xs: &[f64]) -> Result<()> {
    match xs.iter().position(|&p| !(p.is_finite() && p > 0.0)) {
        Some(i) => Err(Error::invalid(name, format!("value {} at index {i} is not a positive number", xs[i]))),
        None => Ok(()),
    }
}

impl PriceSeries {
    pub fn new(timestamps: Vec<i64>, prices: Vec<f64>, volumes: Option<Vec<f64>>, level: usize) -> Result<Self> {
        if timestamps.len() != prices.len() {
            return Err(Error::invalid("prices", "length differs from timestamps"));
        }
        if let Some(i) = timestamps.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::invalid("timestamps", format!("not strictly increasing at index {}", i + 1)));
        }
        positive_prices("prices", &prices)?;
        if let Some(v) = &volumes {
            if v.len() != prices.len() {
                return Err(Error::invalid("volumes", "length differs from prices"));
            }
            if let Some(i) = v.iter().position(|&x| !(x.is_finite() && x >= 0.0)) {
                return Err(Error::invalid("volumes", format!("value {} at index {i} is negative or not finite", v[i])));
            }
        }
        Ok(Self {
            timestamps,
            prices,
            volumes,
            opens: None,
            level,
        })
    }

    /// Attaches per-sample session opens (the series values are the closes).
    pub fn with_opens(mut self, opens: Vec<f64>) -> Result<Self> {
        if opens.len() != self.prices.len() {
            return Err(Error::invalid("opens", "length differs from prices"));
        }
        positive_prices("opens", &opens)?;
        self.opens = Some(opens);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    pub fn timestamps(&self) -> &[i64] {
        &self.timestamps
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn volumes(&self) -> Option<&[f64]> {
        self.volumes.as_deref()
    }

    pub fn opens(&self) -> Option<&[f64]> {
        self.opens.as_deref()
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// Mean spacing between consecutive timestamps, in milliseconds.
    pub fn mean_spacing_ms(&self) -> Option<f64> {
        if self.len() < 2 {
            return None;
        }
        Some((self.timestamps[self.len() - 1] - self.timestamps[0]) as f64 / (self.len() - 1) as f64)
    }

    /// Same samples with every price (and open) multiplied by `factor`.
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        let mut out = self.clone();
        out.prices.iter_mut().for_each(|p| *p *= factor);
        if let Some(o) = out.opens.as_mut() {
            o.iter_mut().for_each(|p| *p *= factor);
        }
        positive_prices("prices", &out.prices)?;
        Ok(out)
    }

    /// `timestamp,price` rows.
    pub fn to_csv(&self) -> String {
        let mut t = CsvTable::new(&["timestamp", "price"]);
        for (ts, p) in self.timestamps.iter().zip(&self.prices) {
            t.row([ts.to_string(), float17(*p)]);
        }
        t.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(PriceSeries::new(vec![1, 2], vec![1.0, 2.0], None, 0).is_ok());
        assert!(PriceSeries::new(vec![2, 2], vec![1.0, 2.0], None, 0).is_err());
        assert!(PriceSeries::new(vec![1, 2], vec![1.0, 0.0], None, 0).is_err());
        assert!(PriceSeries::new(vec![1, 2], vec![1.0, 2.0], Some(vec![1.0]), 0).is_err());
        assert!(PriceSeries::new(vec![1, 2], vec![1.0, 2.0], Some(vec![1.0, -1.0]), 0).is_err());
        let s = PriceSeries::new(vec![1, 2], vec![1.0, 2.0], None, 0).unwrap();
        assert!(s.clone().with_opens(vec![1.0]).is_err());
        assert!(s.with_opens(vec![1.0, 1.5]).is_ok());
    }

    #[test]
    fn spacing() {
        let s = PriceSeries::new(vec![0, 10, 40], vec![1.0; 3], None, 0).unwrap();
        assert_eq!(s.mean_spacing_ms(), Some(20.0));
    }
}
