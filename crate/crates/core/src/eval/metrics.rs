use serde::{Deserialize, Serialize};

use super::confusion::CharConfusion;
use super::EvalError;
use crate::scalar::Scalar;

/// Derived character-level metrics. `None` marks an undefined value (a zero
/// denominator), never a silent 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics<T> {
    pub precision: Option<T>,
    pub recall: Option<T>,
    pub f1: Option<T>,
    pub accuracy: Option<T>,
    pub auroc: Option<T>,
}

impl<T: Scalar> Metrics<T> {
    pub fn to_f64(&self) -> Metrics<f64> {
        let f = |v: &Option<T>| v.as_ref().map(Scalar::to_f64);
        Metrics {
            precision: f(&self.precision),
            recall: f(&self.recall),
            f1: f(&self.f1),
            accuracy: f(&self.accuracy),
            auroc: f(&self.auroc),
        }
    }
}

fn ratio<T: Scalar>(num: u64, den: u64) -> Option<T> {
    (den > 0).then(|| T::ratio(num, den))
}

pub fn precision<T: Scalar>(c: &CharConfusion) -> Option<T> {
    ratio(c.tp, c.pred_positive())
}

pub fn recall<T: Scalar>(c: &CharConfusion) -> Option<T> {
    ratio(c.tp, c.gold_positive())
}

pub fn accuracy<T: Scalar>(c: &CharConfusion) -> Option<T> {
    ratio(c.tp + c.tn, c.total())
}

pub fn specificity<T: Scalar>(c: &CharConfusion) -> Option<T> {
    ratio(c.tn, c.gold_negative())
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn harmonic_mean<T: Scalar>(p: T, r: T) -> T {
    let sum = p.clone() + r.clone();
    if sum == T::zero() {
        return T::zero();
    }
    T::from_count(2) * p * r / sum
}

pub fn f1<T: Scalar>(c: &CharConfusion) -> Option<T> {
    Some(harmonic_mean(precision::<T>(c)?, recall::<T>(c)?))
}

/// Single operating point ROC area: `(TPR + TNR) / 2`. Undefined when
/// either class is absent.
pub fn auroc_binary<T: Scalar>(c: &CharConfusion) -> Option<T> {
    let tpr = recall::<T>(c)?;
    let tnr = specificity::<T>(c)?;
    Some((tpr + tnr) * T::half())
}

pub fn metrics<T: Scalar>(c: &CharConfusion) -> Metrics<T> {
    Metrics {
        precision: precision(c),
        recall: recall(c),
        f1: f1(c),
        accuracy: accuracy(c),
        auroc: auroc_binary(c),
    }
}

/// Sums the counts, then derives metrics from the sum.
pub fn micro_metrics<T: Scalar>(confusions: &[CharConfusion]) -> Result<(CharConfusion, Metrics<T>), EvalError> {
    if confusions.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let total: CharConfusion = confusions.iter().copied().sum();
    Ok((total, metrics(&total)))
}

/// Per-instance metrics for macro summaries. Instances with no gold or no
/// predicted characters get fixed values instead of undefined markers:
/// both empty gives P = R = F1 = 1, gold empty gives P = 0, R = 1, F1 = 0,
/// predictions empty gives all three 0.
pub fn instance_metrics<T: Scalar>(c: &CharConfusion) -> Metrics<T> {
    let mut m = metrics::<T>(c);
    let (gold_empty, pred_empty) = (c.gold_positive() == 0, c.pred_positive() == 0);
    let (p, r, f) = match (gold_empty, pred_empty) {
        (true, true) => (T::one(), T::one(), T::one()),
        (true, false) => (T::zero(), T::one(), T::zero()),
        (false, true) => (T::zero(), T::zero(), T::zero()),
        (false, false) => return m,
    };
    m.precision = Some(p);
    m.recall = Some(r);
    m.f1 = Some(f);
    m
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quartiles<T> {
    pub median: T,
    pub q1: T,
    pub q3: T,
    pub n: usize,
}

impl<T: Scalar> Quartiles<T> {
    /// `median (q1, q3)` with values rounded to 2 decimals and trailing
    /// zeros dropped, e.g. `1 (0.92, 1)`.
    pub fn render(&self) -> String {
        format!(
            "{} ({}, {})",
            trim_decimal(self.median.to_f64(), 2),
            trim_decimal(self.q1.to_f64(), 2),
            trim_decimal(self.q3.to_f64(), 2)
        )
    }

    pub fn to_f64(&self) -> Quartiles<f64> {
        Quartiles {
            median: self.median.to_f64(),
            q1: self.q1.to_f64(),
            q3: self.q3.to_f64(),
            n: self.n,
        }
    }
}

/// Quantile `k/4` by linear interpolation between closest ranks
/// (position `(n - 1) * k / 4` in the sorted values).
pub fn quartile<T: Scalar>(sorted: &[T], k: u64) -> Option<T> {
    let n = sorted.len() as u64;
    if n == 0 {
        return None;
    }
    let pos = (n - 1) * k;
    let (lo, rem) = ((pos / 4) as usize, pos % 4);
    let base = sorted[lo].clone();
    if rem == 0 {
        return Some(base);
    }
    let next = sorted[lo + 1].clone();
    Some(base.clone() + (next - base) * T::ratio(rem, 4))
}

pub fn quartiles<T: Scalar>(values: &[T]) -> Option<Quartiles<T>> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("metric values are comparable"));
    Some(Quartiles {
        median: quartile(&v, 2)?,
        q1: quartile(&v, 1)?,
        q3: quartile(&v, 3)?,
        n: v.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroSummary<T> {
    pub precision: Option<Quartiles<T>>,
    pub recall: Option<Quartiles<T>>,
    pub f1: Option<Quartiles<T>>,
    pub accuracy: Option<Quartiles<T>>,
    /// Instances where AUROC is undefined are left out.
    pub auroc: Option<Quartiles<T>>,
}

impl<T: Scalar> MacroSummary<T> {
    pub fn to_f64(&self) -> MacroSummary<f64> {
        let f = |q: &Option<Quartiles<T>>| q.as_ref().map(Quartiles::to_f64);
        MacroSummary {
            precision: f(&self.precision),
            recall: f(&self.recall),
            f1: f(&self.f1),
            accuracy: f(&self.accuracy),
            auroc: f(&self.auroc),
        }
    }
}

pub fn macro_distribution<T: Scalar>(per_instance: &[Metrics<T>]) -> MacroSummary<T> {
    let pick = |f: fn(&Metrics<T>) -> &Option<T>| {
        let vals: Vec<T> = per_instance.iter().filter_map(|m| f(m).clone()).collect();
        quartiles(&vals)
    };
    MacroSummary {
        precision: pick(|m| &m.precision),
        recall: pick(|m| &m.recall),
        f1: pick(|m| &m.f1),
        accuracy: pick(|m| &m.accuracy),
        auroc: pick(|m| &m.auroc),
    }
}

/// `100 * num / den`, undefined for an empty denominator.
pub fn percent<T: Scalar>(num: u64, den: u64) -> Option<T> {
    ratio::<T>(num, den).map(|r| r * T::from_count(100))
}

pub(crate) fn trim_decimal(v: f64, places: usize) -> String {
    let s = format!("{v:.places$}");
    if !s.contains('.') {
        return s;
    }
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

/// Fixed decimals, or `NA` for an undefined value.
pub fn fmt_opt<T: Scalar>(v: &Option<T>, places: usize) -> String {
    match v {
        Some(x) => format!("{:.places$}", x.to_f64()),
        None => "NA".to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    #[test]
    fn auroc_examples() {
        assert_eq!(auroc_binary::<Rational>(&CharConfusion::new(2, 3, 3, 12)), Some(Rational::new(3, 5)));
        assert_eq!(auroc_binary::<f64>(&CharConfusion::new(5, 0, 0, 15)), Some(1.0));
        assert_eq!(auroc_binary::<f64>(&CharConfusion::new(0, 2, 0, 15)), None);
    }

    #[test]
    fn micro_sums_then_divides() {
        let cs = [CharConfusion::new(2, 3, 3, 12), CharConfusion::new(5, 0, 0, 15)];
        let (total, m) = micro_metrics::<Rational>(&cs).unwrap();
        assert_eq!(total, CharConfusion::new(7, 3, 3, 27));
        let seven_tenths = Some(Rational::new(7, 10));
        assert_eq!((m.precision, m.recall, m.f1), (seven_tenths, seven_tenths, seven_tenths));
        assert!(matches!(micro_metrics::<f64>(&[]), Err(EvalError::EmptyInput)));
    }

    #[test]
    fn undefined_markers() {
        let m = metrics::<f64>(&CharConfusion::new(0, 0, 0, 10));
        assert_eq!((m.precision, m.recall, m.f1, m.auroc), (None, None, None, None));
        assert_eq!(m.accuracy, Some(1.0));
        assert_eq!(f1::<f64>(&CharConfusion::new(0, 3, 2, 1)), Some(0.0));
    }

    #[test]
    fn instance_policy() {
        let m = instance_metrics::<f64>(&CharConfusion::new(0, 0, 0, 10));
        assert_eq!((m.precision, m.recall, m.f1), (Some(1.0), Some(1.0), Some(1.0)));
        let m = instance_metrics::<f64>(&CharConfusion::new(0, 4, 0, 10));
        assert_eq!((m.precision, m.recall, m.f1), (Some(0.0), Some(1.0), Some(0.0)));
        let m = instance_metrics::<f64>(&CharConfusion::new(0, 0, 4, 10));
        assert_eq!((m.precision, m.recall, m.f1), (Some(0.0), Some(0.0), Some(0.0)));
    }

    #[test]
    fn quartiles_by_interpolation() {
        let q = quartiles(&[1.0, 0.0, 0.5]).unwrap();
        assert_eq!((q.median, q.q1, q.q3), (0.5, 0.25, 0.75));
        let q = quartiles(&[Rational::from_integer(1); 4]).unwrap();
        assert_eq!(q.render(), "1 (1, 1)");
        let q = quartiles(&[0.9, 0.92, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(q.render(), "1 (0.92, 1)");
        assert!(quartiles::<f64>(&[]).is_none());
    }

    #[test]
    fn rendering() {
        assert_eq!(trim_decimal(0.5, 2), "0.5");
        assert_eq!(trim_decimal(1.0, 2), "1");
        assert_eq!(trim_decimal(0.9249, 2), "0.92");
        assert_eq!(fmt_opt::<f64>(&None, 3), "NA");
        assert_eq!(fmt_opt(&Some(0.98), 3), "0.980");
    }
}
