#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mdsp::{MdspInstance, QMatrix, QVector, Rational};

pub fn q(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn vec_i(xs: &[i64]) -> QVector {
    QVector::from_ints(xs)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Determinant by plain fraction Gaussian elimination.
pub fn det(mut m: Vec<Vec<Rational>>) -> Rational {
    let n = m.len();
    let mut d = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !m[r][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            m.swap(p, c);
            d = -d;
        }
        d *= &m[c][c];
        for r in c + 1..n {
            let f = &m[r][c] / &m[c][c];
            for k in c..n {
                let t = &f * &m[c][k];
                m[r][k] -= t;
            }
        }
    }
    d
}

pub fn gram(vs: &[QVector]) -> Vec<Vec<Rational>> {
    vs.iter().map(|a| vs.iter().map(|b| a.dot(b)).collect()).collect()
}

/// `dist²(v, span(bs))` as a ratio of Gram determinants.
pub fn dist_sq(v: &QVector, bs: &[QVector]) -> Rational {
    let mut all = vec![v.clone()];
    all.extend(bs.iter().cloned());
    det(gram(&all)) / det(gram(bs))
}

pub fn shifted(inst: &MdspInstance, x: &[i64]) -> Vec<QVector> {
    inst.rest()
        .iter()
        .zip(x)
        .map(|(b, &xi)| b.add_scaled(inst.fixed(), &q(xi)))
        .collect()
}

pub fn random_int_vector(rng: &mut ChaCha8Rng, dim: usize, bound: i64) -> QVector {
    QVector::from_ints(&(0..dim).map(|_| rng.random_range(-bound..=bound)).collect::<Vec<_>>())
}

/// Square MDSP instance with `n + 1` integer rows in `[−bound, bound]`.
pub fn random_instance(rng: &mut ChaCha8Rng, n: usize, bound: i64) -> MdspInstance {
    loop {
        let rows: Vec<QVector> = (0..=n).map(|_| random_int_vector(rng, n + 1, bound)).collect();
        if det(gram(&rows)).is_zero() {
            continue;
        }
        return MdspInstance::new(rows[0].clone(), rows[1..].to_vec()).expect("independent rows");
    }
}

pub fn random_nonsingular(rng: &mut ChaCha8Rng, dim: usize, bound: i64) -> QMatrix {
    loop {
        let rows: Vec<QVector> = (0..dim).map(|_| random_int_vector(rng, dim, bound)).collect();
        if !det(rows.iter().map(|r| r.entries().to_vec()).collect()).is_zero() {
            return QMatrix::from_rows(&rows).unwrap();
        }
    }
}

pub fn random_rational(rng: &mut ChaCha8Rng, bound: i64, max_den: i64) -> Rational {
    qr(rng.random_range(-bound..=bound), rng.random_range(1..=max_den))
}

/// All integer points of `[lo_i, hi_i]`, in lexicographic order.
pub fn box_points(lo: &[i64], hi: &[i64]) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for (&l, &h) in lo.iter().zip(hi) {
        out = out
            .into_iter()
            .flat_map(|p| {
                (l..=h).map(move |x| {
                    let mut p = p.clone();
                    p.push(x);
                    p
                })
            })
            .collect();
    }
    out
}

/// Maximum of `dist²(v, ⟨B(x)⟩)` over the box, lexicographically first maximizer.
pub fn brute_force_mdsp(inst: &MdspInstance, lo: &[i64], hi: &[i64]) -> (Vec<i64>, Rational) {
    let mut best: Option<(Vec<i64>, Rational)> = None;
    for x in box_points(lo, hi) {
        let d = dist_sq(inst.fixed(), &shifted(inst, &x));
        if best.as_ref().is_none_or(|(_, b)| d > *b) {
            best = Some((x, d));
        }
    }
    best.unwrap()
}

/// Minimum of `(j+c)ᵀG(j+c)` over the box, lexicographically first minimizer.
pub fn brute_force_cvp(g: &QMatrix, c: &QVector, lo: &[i64], hi: &[i64]) -> (Vec<i64>, Rational) {
    let n = c.dim();
    let mut best: Option<(Vec<i64>, Rational)> = None;
    for j in box_points(lo, hi) {
        let y: Vec<Rational> = (0..n).map(|i| q(j[i]) + &c[i]).collect();
        let mut o = Rational::zero();
        for a in 0..n {
            for b in 0..n {
                o += g.get(a, b) * &y[a] * &y[b];
            }
        }
        if best.as_ref().is_none_or(|(_, b)| o < *b) {
            best = Some((j, o));
        }
    }
    best.unwrap()
}

pub fn to_i64(xs: &[BigInt]) -> Vec<i64> {
    xs.iter().map(|x| i64::try_from(x).expect("small shift")).collect()
}

fn det_i128(mut m: Vec<Vec<i128>>) -> i128 {
    // fraction-free elimination
    let n = m.len();
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n {
        if m[k][k] == 0 {
            let Some(p) = (k + 1..n).find(|&r| m[r][k] != 0) else {
                return 0;
            };
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

/// Brute force over `[−w, w]ⁿ` for integer instances. Uses
/// `dist² = det([v|B])² / det Gram(B(x))`, so only small integer Gram
/// determinants are compared.
pub fn brute_force_mdsp_int(inst: &MdspInstance, w: i64) -> (Vec<i64>, Rational) {
    let as_int = |v: &QVector| -> Vec<i128> {
        v.iter()
            .map(|c| {
                assert!(c.is_integer());
                i128::try_from(c.to_integer()).unwrap()
            })
            .collect()
    };
    let v = as_int(inst.fixed());
    let b: Vec<Vec<i128>> = inst.rest().iter().map(as_int).collect();
    let n = b.len();
    let mut best: Option<(Vec<i64>, i128)> = None;
    let mut x = vec![-w; n];
    let dot = |p: &[i128], q: &[i128]| p.iter().zip(q).map(|(a, c)| a * c).sum::<i128>();
    let bb: Vec<Vec<i128>> = b.iter().map(|p| b.iter().map(|q| dot(p, q)).collect()).collect();
    let bv: Vec<i128> = b.iter().map(|p| dot(p, &v)).collect();
    let vv = dot(&v, &v);
    let mut g = bb.clone();
    loop {
        // Gram entries of b_i + x_i v
        for i in 0..n {
            let xi = x[i] as i128;
            for j in 0..n {
                let xj = x[j] as i128;
                g[i][j] = bb[i][j] + xi * bv[j] + xj * bv[i] + xi * xj * vv;
            }
        }
        let d = match n {
            1 => g[0][0],
            2 => g[0][0] * g[1][1] - g[0][1] * g[1][0],
            3 => {
                g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1]) - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
                    + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0])
            }
            _ => det_i128(g.clone()),
        };
        if best.as_ref().is_none_or(|(_, bd)| d < *bd) {
            best = Some((x.clone(), d));
        }
        let mut k = n;
        loop {
            if k == 0 {
                let (x, d) = best.unwrap();
                let full = det(gram(&inst.all_vectors()));
                return (x, full / Rational::from_integer(BigInt::from(d)));
            }
            k -= 1;
            if x[k] < w {
                x[k] += 1;
                break;
            }
            x[k] = -w;
        }
    }
}
