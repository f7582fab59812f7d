//! Exact rational scalars and their text form (`"p/q"`).

use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar used for every coordinate in the tree and product spaces.
pub type Q = Ratio<i128>;

pub fn q(n: i128, d: i128) -> Q {
    Q::new(n, d)
}

pub fn qi(n: i128) -> Q {
    Q::from_integer(n)
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"0.05"` into an exact rational.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: i128 = n.trim().parse().map_err(|_| bad())?;
        let d: i128 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Q::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || frac.len() > 30 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.trim_start().starts_with('-');
        let int_part: i128 = if int.is_empty() || int == "-" || int == "+" {
            0
        } else {
            int.parse().map_err(|_| bad())?
        };
        let den = 10i128.pow(frac.len() as u32);
        let frac_part: i128 = frac.parse().map_err(|_| bad())?;
        let mag = int_part.abs() * den + frac_part;
        return Ok(Q::new(if neg { -mag } else { mag }, den));
    }
    let n: i128 = s.parse().map_err(|_| bad())?;
    Ok(Q::from_integer(n))
}

pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn to_f64(x: &Q) -> f64 {
    // numerators can exceed f64's exact range; the quotient is still well conditioned
    x.numer().to_f64().unwrap_or(f64::NAN) / x.denom().to_f64().unwrap_or(f64::NAN)
}

/// Smallest integer `k >= 0` with `k * step >= sqrt(dist_sq)`.
pub fn ceil_ratio_of_sqrt(dist_sq: &Q, step: &Q) -> u64 {
    debug_assert!(step.is_positive());
    if dist_sq.is_zero() {
        return 0;
    }
    let guess = (to_f64(dist_sq).sqrt() / to_f64(step)).ceil().max(1.0) as u64;
    let fits = |k: u64| {
        let kk = Q::from_integer(k as i128) * step;
        kk * kk >= *dist_sq
    };
    let mut k = guess.saturating_sub(2).max(1);
    while !fits(k) {
        k += 1;
    }
    while k > 1 && fits(k - 1) {
        k -= 1;
    }
    k
}

/// Rounds `x` to the nearest multiple of `pitch`, ties toward +infinity.
pub fn snap_to_pitch(x: &Q, pitch: &Q) -> Q {
    let half = Q::new(1, 2);
    let k = (x / pitch + half).floor();
    k * pitch
}

/// Integer `floor((2 * num + den) / (2 * den))`, i.e. `num / den` rounded half up.
pub fn round_half_up(num: i128, den: i128) -> i128 {
    debug_assert!(den > 0);
    num_integer::Integer::div_floor(&(2 * num + den), &(2 * den))
}

pub fn unit_interval_contains(s: &Q) -> bool {
    !s.is_negative() && *s <= Q::one()
}

/// Serde adapters storing rationals as `"p/q"` strings.
pub mod serde_q {
    use super::{fmt_q, parse_q, Q};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_q(&s).map_err(serde::de::Error::custom)
    }

    pub mod vec {
        use super::super::{fmt_q, parse_q, Q};
        use serde::ser::SerializeSeq;
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(xs: &[Q], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(xs.len()))?;
            for x in xs {
                seq.serialize_element(&fmt_q(x))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
            let v = Vec::<String>::deserialize(d)?;
            v.iter()
                .map(|s| parse_q(s).map_err(serde::de::Error::custom))
                .collect()
        }
    }
}
