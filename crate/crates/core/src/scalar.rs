//! Scalar types usable as metric distances.
//!
//! Distances only need ordered ring arithmetic, so the metric code is written
//! against [`Scalar`] and instantiated with exact rationals by default.

use std::fmt::{Debug, Display};

use num_rational::Ratio;
use num_traits::{Num, Signed};

use crate::error::{Error, Result};

/// Ordered numeric type with an exact textual form.
pub trait Scalar:
    Num + Signed + PartialOrd + Clone + Debug + Display + Send + Sync + 'static
{
    /// Parses `p/q`, an integer, or a decimal literal.
    fn parse_scalar(text: &str) -> Result<Self>;

    /// Renders the value; rationals render as `p/q`, or `p` when integral.
    fn render(&self) -> String;
}

fn bad(text: &str) -> Error {
    Error::InvalidMetric(format!("cannot parse `{text}` as a number"))
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn parse_scalar(text: &str) -> Result<Self> {
                let text = text.trim();
                if let Some((p, q)) = text.split_once('/') {
                    let p: $t = p.trim().parse().map_err(|_| bad(text))?;
                    let q: $t = q.trim().parse().map_err(|_| bad(text))?;
                    if q == 0.0 {
                        return Err(bad(text));
                    }
                    Ok(p / q)
                } else {
                    text.parse().map_err(|_| bad(text))
                }
            }

            fn render(&self) -> String {
                format!("{self}")
            }
        }
    };
}

float_scalar!(f32);
float_scalar!(f64);

macro_rules! ratio_scalar {
    ($i:ty) => {
        impl Scalar for Ratio<$i> {
            fn parse_scalar(text: &str) -> Result<Self> {
                let text = text.trim();
                if let Some((p, q)) = text.split_once('/') {
                    let p: $i = p.trim().parse().map_err(|_| bad(text))?;
                    let q: $i = q.trim().parse().map_err(|_| bad(text))?;
                    if q == 0 {
                        return Err(bad(text));
                    }
                    Ok(Ratio::new(p, q))
                } else if let Some((whole, frac)) = text.split_once('.') {
                    let negative = whole.starts_with('-');
                    let whole: $i = if whole.is_empty() || whole == "-" {
                        0
                    } else {
                        whole.parse().map_err(|_| bad(text))?
                    };
                    if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                        return Err(bad(text));
                    }
                    let digits: $i = frac.parse().map_err(|_| bad(text))?;
                    let scale: $i = (10 as $i)
                        .checked_pow(frac.len() as u32)
                        .ok_or_else(|| bad(text))?;
                    let frac = Ratio::new(digits, scale);
                    let whole = Ratio::from_integer(whole);
                    Ok(if negative { whole - frac } else { whole + frac })
                } else {
                    let p: $i = text.parse().map_err(|_| bad(text))?;
                    Ok(Ratio::from_integer(p))
                }
            }

            fn render(&self) -> String {
                if *self.denom() == 1 {
                    self.numer().to_string()
                } else {
                    format!("{}/{}", self.numer(), self.denom())
                }
            }
        }
    };
}

ratio_scalar!(i64);
ratio_scalar!(i128);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_forms() {
        let r = Ratio::<i64>::parse_scalar("0.6").unwrap();
        assert_eq!(r, Ratio::new(3, 5));
        assert_eq!(Ratio::<i64>::parse_scalar("6/5").unwrap().render(), "6/5");
        assert_eq!(Ratio::<i64>::parse_scalar("1").unwrap().render(), "1");
        assert_eq!(
            Ratio::<i64>::parse_scalar("-1.25").unwrap(),
            Ratio::new(-5, 4)
        );
        assert!(Ratio::<i64>::parse_scalar("1/0").is_err());
        assert!(Ratio::<i64>::parse_scalar("x").is_err());
    }

    #[test]
    fn float_forms() {
        assert_eq!(f64::parse_scalar("3/4").unwrap(), 0.75);
        assert_eq!(f32::parse_scalar("0.5").unwrap(), 0.5);
    }
}
