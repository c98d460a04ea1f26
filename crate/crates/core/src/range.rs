//! Inclusive range syntax `a..b[:step]` used by the command line.
//!
//! A bare value is a one-element range. Integer ranges default to step 1;
//! real ranges must give the step explicitly. `b < a` is an empty range.

use std::str::FromStr;

use crate::error::{usage, Result};
use crate::report::sig12;

#[derive(Debug, Clone, PartialEq)]
pub struct IntRange {
    pub start: usize,
    pub end: usize,
    pub step: usize,
}

impl IntRange {
    pub fn single(v: usize) -> Self {
        Self { start: v, end: v, step: 1 }
    }

    pub fn values(&self) -> Vec<usize> {
        if self.end < self.start {
            return Vec::new();
        }
        (self.start..=self.end).step_by(self.step).collect()
    }
}

impl FromStr for IntRange {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| usage(format!("'{t}' is not a nonnegative integer in range '{s}'")))
        };
        match split_range(s)? {
            (a, None, None) => Ok(Self::single(parse(a)?)),
            (a, Some(b), step) => {
                let step = step.map(parse).transpose()?.unwrap_or(1);
                if step == 0 {
                    return Err(usage(format!("step must be positive in '{s}'")));
                }
                Ok(Self { start: parse(a)?, end: parse(b)?, step })
            }
            (_, None, Some(_)) => Err(usage(format!("malformed range '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealRange {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl RealRange {
    pub fn single(v: f64) -> Self {
        Self { start: v, end: v, step: 1.0 }
    }

    /// `start + i·step` rounded to 12 significant digits, so `0.1..0.3:0.1` yields exactly `0.3`.
    pub fn values(&self) -> Vec<f64> {
        if self.end < self.start {
            return Vec::new();
        }
        let count = ((self.end - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| sig12(self.start + i as f64 * self.step)).collect()
    }
}

impl FromStr for RealRange {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse = |t: &str| {
            let v = t
                .trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("'{t}' is not a number in range '{s}'")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(usage(format!("'{t}' is not finite in range '{s}'")))
            }
        };
        match split_range(s)? {
            (a, None, None) => Ok(Self::single(parse(a)?)),
            (a, Some(b), Some(step)) => {
                let step = parse(step)?;
                if !(step > 0.0) {
                    return Err(usage(format!("step must be positive in '{s}'")));
                }
                let r = Self { start: parse(a)?, end: parse(b)?, step };
                if (r.end - r.start) / step > 1e7 {
                    return Err(usage(format!("range '{s}' has more than 10^7 points")));
                }
                Ok(r)
            }
            (_, Some(_), None) => Err(usage(format!("real range '{s}' needs an explicit step, as in a..b:step"))),
            (_, None, Some(_)) => Err(usage(format!("malformed range '{s}'"))),
        }
    }
}

fn split_range(s: &str) -> Result<(&str, Option<&str>, Option<&str>)> {
    let s = s.trim();
    if s.is_empty() {
        return Err(usage("empty range"));
    }
    let (body, step) = match s.split_once(':') {
        Some((body, step)) => (body, Some(step)),
        None => (s, None),
    };
    match body.split_once("..") {
        Some((a, b)) if !b.starts_with('.') => Ok((a, Some(b), step)),
        Some(_) => Err(usage(format!("malformed range '{s}'"))),
        None => Ok((body, None, step)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_ranges() {
        assert_eq!("4..6".parse::<IntRange>().unwrap().values(), vec![4, 5, 6]);
        assert_eq!("4".parse::<IntRange>().unwrap().values(), vec![4]);
        assert_eq!("4..10:3".parse::<IntRange>().unwrap().values(), vec![4, 7, 10]);
        assert!("6..4".parse::<IntRange>().unwrap().values().is_empty());
        assert!("4..6:0".parse::<IntRange>().is_err());
        assert!("x..6".parse::<IntRange>().is_err());
        assert!("4:2".parse::<IntRange>().is_err());
        assert!("-4".parse::<IntRange>().is_err());
        assert!("".parse::<IntRange>().is_err());
    }

    #[test]
    fn real_ranges() {
        let v = "0.1..2:0.1".parse::<RealRange>().unwrap().values();
        assert_eq!(v.len(), 20);
        assert_eq!(v[2], 0.3);
        assert_eq!(*v.last().unwrap(), 2.0);
        assert_eq!("-0.5".parse::<RealRange>().unwrap().values(), vec![-0.5]);
        assert_eq!("-1..1:0.5".parse::<RealRange>().unwrap().values(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!("1e-1..3e-1:1e-1".parse::<RealRange>().unwrap().values().len(), 3);
        assert!("0.1..2".parse::<RealRange>().is_err());
        assert!("0.1..2:-1".parse::<RealRange>().is_err());
        assert!("0.1...2:1".parse::<RealRange>().is_err());
        assert!("nan".parse::<RealRange>().is_err());
        assert!("2..1:0.1".parse::<RealRange>().unwrap().values().is_empty());
    }
}
