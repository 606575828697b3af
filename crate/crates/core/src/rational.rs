//! Exact rational scalars, vectors and the small amount of linear algebra the
//! geometry layer needs.

use num::bigint::BigInt;
use num::{BigRational, Integer, One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;
pub type RVec = Vec<Rat>;

pub fn int(v: i64) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

pub fn frac(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

pub fn rvec(xs: &[i64]) -> RVec {
    xs.iter().map(|&x| int(x)).collect()
}

pub fn zeros(n: usize) -> RVec {
    vec![Rat::zero(); n]
}

pub fn unit(n: usize, i: usize) -> RVec {
    let mut v = zeros(n);
    v[i] = Rat::one();
    v
}

/// Parses `"p/q"`, `"p"` or an integer literal. Decimal points are refused.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if s.contains(['.', 'e', 'E']) {
        return None;
    }
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                return None;
            }
            Some(Rat::new(p, q))
        }
        None => Some(Rat::from_integer(s.parse().ok()?)),
    }
}

pub fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // fall back for huge numerators/denominators
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn vec_f64(v: &[Rat]) -> Vec<f64> {
    v.iter().map(to_f64).collect()
}

/// Exact conversion of a finite float.
pub fn from_f64(x: f64) -> Rat {
    Rat::from_float(x).unwrap_or_else(Rat::zero)
}

/// Best rational approximation with denominator at most `max_den`.
pub fn approx_f64(x: f64, max_den: i64) -> Rat {
    if !x.is_finite() {
        return Rat::zero();
    }
    let neg = x < 0.0;
    let mut y = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    for _ in 0..64 {
        let a = y.floor();
        if a > 1e15 {
            break;
        }
        let ai = a as i128;
        let p2 = ai * p1 + p0;
        let q2 = ai * q1 + q0;
        if q2 > max_den as i128 {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let f = y - a;
        if f < 1e-15 {
            break;
        }
        y = 1.0 / f;
    }
    if q1 == 0 {
        return Rat::zero();
    }
    let r = Rat::new(BigInt::from(p1), BigInt::from(q1));
    if neg {
        -r
    } else {
        r
    }
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    let mut s = Rat::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            s += x * y;
        }
    }
    s
}

pub fn add(a: &[Rat], b: &[Rat]) -> RVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[Rat], b: &[Rat]) -> RVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(t: &Rat, a: &[Rat]) -> RVec {
    a.iter().map(|x| t * x).collect()
}

pub fn neg(a: &[Rat]) -> RVec {
    a.iter().map(|x| -x).collect()
}

pub fn is_zero_vec(a: &[Rat]) -> bool {
    a.iter().all(Zero::is_zero)
}

pub fn norm2(a: &[Rat]) -> Rat {
    dot(a, a)
}

pub fn mat_vec(m: &[RVec], x: &[Rat]) -> RVec {
    m.iter().map(|row| dot(row, x)).collect()
}

pub fn transpose(m: &[RVec], ncols: usize) -> Vec<RVec> {
    (0..ncols).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

/// Scales a nonzero vector to the primitive integer vector on the same ray.
pub fn primitive(v: &[Rat]) -> RVec {
    let mut l = BigInt::one();
    for x in v {
        if !x.is_zero() {
            l = l.lcm(x.denom());
        }
    }
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Rat::from_integer(l.clone())).to_integer()).collect();
    let mut g = BigInt::zero();
    for x in &ints {
        g = g.gcd(x);
    }
    if g.is_zero() {
        return v.to_vec();
    }
    ints.into_iter().map(|x| Rat::from_integer(x / &g)).collect()
}

/// Primitive vector with the sign normalized so the first nonzero entry is positive.
pub fn primitive_line(v: &[Rat]) -> RVec {
    let p = primitive(v);
    match p.iter().find(|x| !x.is_zero()) {
        Some(x) if x.is_negative() => neg(&p),
        _ => p,
    }
}

/// Reduced row echelon form. Returns the reduced nonzero rows and their pivot columns.
pub fn rref(rows: &[RVec], ncols: usize) -> (Vec<RVec>, Vec<usize>) {
    let mut m: Vec<RVec> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..ncols {
                    if !m[r][j].is_zero() {
                        let t = &f * &m[r][j];
                        m[i][j] -= t;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    (m, pivots)
}

pub fn rank(rows: &[RVec], ncols: usize) -> usize {
    rref(rows, ncols).1.len()
}

/// Basis of {x : rows·x = 0}.
pub fn null_space(rows: &[RVec], ncols: usize) -> Vec<RVec> {
    let (m, pivots) = rref(rows, ncols);
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = zeros(ncols);
        v[free] = Rat::one();
        for (row, &p) in m.iter().zip(&pivots) {
            v[p] = -row[free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Some solution of `rows·x = rhs`, or `None` when inconsistent.
pub fn solve_affine(rows: &[RVec], rhs: &[Rat], ncols: usize) -> Option<RVec> {
    let aug: Vec<RVec> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut v = r.clone();
            v.push(b.clone());
            v
        })
        .collect();
    let (m, pivots) = rref(&aug, ncols + 1);
    if pivots.contains(&ncols) {
        return None;
    }
    let mut x = zeros(ncols);
    for (row, &p) in m.iter().zip(&pivots) {
        x[p] = row[ncols].clone();
    }
    Some(x)
}

/// Orthogonal projection of `x` onto the affine set {rows·y = rhs}, exactly.
pub fn project_affine(rows: &[RVec], rhs: &[Rat], x: &[Rat]) -> Option<RVec> {
    let n = x.len();
    let (basis, _) = rref(rows, n);
    if basis.is_empty() {
        return Some(x.to_vec());
    }
    let p = solve_affine(rows, rhs, n)?;
    // y = x - Bᵀ λ with B (x - Bᵀλ) = B p  ->  (B Bᵀ) λ = B x - B p
    let k = basis.len();
    let gram: Vec<RVec> = (0..k).map(|i| (0..k).map(|j| dot(&basis[i], &basis[j])).collect()).collect();
    let r: RVec = basis.iter().map(|b| dot(b, x) - dot(b, &p)).collect();
    let lam = solve_affine(&gram, &r, k)?;
    let mut y = x.to_vec();
    for (b, l) in basis.iter().zip(&lam) {
        for j in 0..n {
            y[j] -= l * &b[j];
        }
    }
    Some(y)
}

/// Sign of a rational as -1, 0, 1.
pub fn sign(r: &Rat) -> i8 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

pub fn det(m: &[RVec]) -> Rat {
    let n = m.len();
    let mut a: Vec<RVec> = m.to_vec();
    let mut d = Rat::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Rat::zero();
        };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= &a[c][c];
        let inv = a[c][c].recip();
        for i in c + 1..n {
            if !a[i][c].is_zero() {
                let f = &a[i][c] * &inv;
                for j in c..n {
                    let t = &f * &a[c][j];
                    a[i][j] -= t;
                }
            }
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_rejects_decimals() {
        assert_eq!(parse_rat("3/6"), Some(frac(1, 2)));
        assert_eq!(parse_rat("-4"), Some(int(-4)));
        assert_eq!(parse_rat("0.5"), None);
        assert_eq!(parse_rat("1/0"), None);
    }

    #[test]
    fn null_space_of_diagonal_line() {
        let ns = null_space(&[rvec(&[1, -1])], 2);
        assert_eq!(ns, vec![rvec(&[1, 1])]);
    }

    #[test]
    fn affine_projection_onto_diagonal() {
        let y = project_affine(&[rvec(&[1, -1])], &[int(0)], &rvec(&[0, 1])).unwrap();
        assert_eq!(y, vec![frac(1, 2), frac(1, 2)]);
    }

    #[test]
    fn determinant_and_primitive() {
        assert_eq!(det(&[rvec(&[2, 1]), rvec(&[1, 3])]), int(5));
        assert_eq!(primitive(&[frac(2, 3), frac(-4, 3)]), rvec(&[1, -2]));
        assert_eq!(approx_f64(0.333333333333, 100), frac(1, 3));
    }
}
