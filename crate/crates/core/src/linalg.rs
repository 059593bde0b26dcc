//! Exact rational linear algebra: fraction-free determinants, rank and null spaces.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"3"`, `"-2/7"` or a plain decimal such as `"0.125"` exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: `{s}`"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(p) => (&s[..p], s[p + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let neg = int_part.starts_with('-');
    let digits = format!("{}{}", int_part.trim_start_matches(['-', '+']), frac_part);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let mut n: BigInt = digits.parse().map_err(|_| bad())?;
    if neg {
        n = -n;
    }
    let shift = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Ok(if shift >= 0 {
        Rational::from_integer(n * num_traits::pow(ten, shift as usize))
    } else {
        Rational::new(n, num_traits::pow(ten, (-shift) as usize))
    })
}

pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Multiplies a rational row by the lcm of its denominators; returns the integer row and the multiplier.
pub fn integer_row(row: &[Rational]) -> (Vec<BigInt>, BigInt) {
    let l = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints = row.iter().map(|x| x.numer() * (&l / x.denom())).collect();
    (ints, l)
}

/// Bareiss fraction-free elimination on the integer image of `rows`.
pub fn determinant(rows: &[Vec<Rational>]) -> Result<Rational> {
    let n = rows.len();
    if let Some(r) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::NotSquare { rows: n, cols: r.len() });
    }
    if n == 0 {
        return Ok(Rational::one());
    }
    let mut scale = BigInt::one();
    let mut a: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| {
            let (ints, l) = integer_row(r);
            scale *= l;
            ints
        })
        .collect();
    let mut sign = 1i32;
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(p) => {
                    a.swap(k, p);
                    sign = -sign;
                }
                None => return Ok(Rational::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    let det = if sign < 0 { -prev } else { prev };
    Ok(Rational::new(det, scale))
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(m: &mut [Vec<Rational>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let (src, dst) = if i < r {
                    let (lo, hi) = m.split_at_mut(r);
                    (&hi[0], &mut lo[i])
                } else {
                    let (lo, hi) = m.split_at_mut(i);
                    (&lo[r], &mut hi[0])
                };
                for (d, s) in dst.iter_mut().zip(src.iter()) {
                    if !s.is_zero() {
                        *d -= &f * s;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(rows: &[Vec<Rational>]) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m).len()
}

/// Basis of the right null space {x : A x = 0}.
pub fn null_space(rows: &[Vec<Rational>], cols: usize) -> Vec<Vec<Rational>> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m);
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Rational::zero(); cols];
        v[free] = Rational::one();
        for (i, &p) in pivots.iter().enumerate() {
            v[p] = -m[i][free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Basis of the left null space {w : w A = 0}, indexed by rows of `A`.
pub fn left_null_space(rows: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let cols = rows.first().map_or(0, |r| r.len());
    let t: Vec<Vec<Rational>> = (0..cols)
        .map(|c| rows.iter().map(|r| r[c].clone()).collect())
        .collect();
    null_space(&t, rows.len())
}

/// Floating determinant by partial pivoting, also returning the product of row norms
/// so callers can apply a relative tolerance.
pub fn determinant_f64(rows: &[Vec<f64>]) -> Result<(f64, f64)> {
    let n = rows.len();
    if let Some(r) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::NotSquare { rows: n, cols: r.len() });
    }
    let norm: f64 = rows
        .iter()
        .map(|r| r.iter().map(|x| x * x).sum::<f64>().sqrt())
        .product();
    let mut a = rows.to_vec();
    let mut det = 1.0;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
            .unwrap();
        if a[p][k] == 0.0 {
            return Ok((0.0, norm));
        }
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        det *= a[k][k];
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    Ok((det, norm))
}

pub fn is_negative(r: &Rational) -> bool {
    r.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(v: &[&[i64]]) -> Vec<Vec<Rational>> {
        v.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect()
    }

    // cofactor expansion, kept independent of the elimination code
    fn cofactor(a: &[Vec<Rational>]) -> Rational {
        if a.is_empty() {
            return Rational::one();
        }
        let mut s = Rational::zero();
        for j in 0..a.len() {
            let minor: Vec<Vec<Rational>> = a[1..]
                .iter()
                .map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, x)| x.clone()).collect())
                .collect();
            let t = &a[0][j] * cofactor(&minor);
            if j % 2 == 0 {
                s += t
            } else {
                s -= t
            }
        }
        s
    }

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rational("-2/4").unwrap(), ratio(-1, 2));
        assert_eq!(parse_rational("0.125").unwrap(), ratio(1, 8));
        assert_eq!(parse_rational("-1.5e2").unwrap(), rat(-150));
        assert_eq!(parse_rational("7").unwrap(), rat(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn small_determinants() {
        assert_eq!(determinant(&m(&[&[0, 1], &[1, 0]])).unwrap(), rat(-1));
        assert_eq!(determinant(&m(&[&[2, 3, 1], &[4, 6, 2], &[1, 0, 5]])).unwrap(), rat(0));
        let a = vec![vec![ratio(1, 2), ratio(1, 3)], vec![ratio(1, 4), ratio(1, 5)]];
        assert_eq!(determinant(&a).unwrap(), ratio(1, 10) - ratio(1, 12));
        assert!(determinant(&m(&[&[1, 2]])).is_err());
    }

    #[test]
    fn left_null_space_is_annihilating() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1], &[2, 2, 4]]);
        let ln = left_null_space(&a);
        assert_eq!(ln.len() + rank(&a), a.len());
        for w in &ln {
            for c in 0..3 {
                let s: Rational = (0..4).map(|r| &w[r] * &a[r][c]).sum();
                assert!(s.is_zero());
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn bareiss_matches_cofactor(n in 1usize..5, vals in proptest::collection::vec((-9i64..9, 1i64..5), 16)) {
            let a: Vec<Vec<Rational>> = (0..n)
                .map(|i| (0..n).map(|j| { let (p, q) = vals[i * 4 + j]; ratio(p, q) }).collect())
                .collect();
            proptest::prop_assert_eq!(determinant(&a).unwrap(), cofactor(&a));
        }
    }
}
