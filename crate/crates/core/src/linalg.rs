//! Dense linear-algebra helpers: matrix exponential, singular values and
//! decomposition of a matrix into decoupled diagonal blocks.

use nalgebra::{DMatrix, DVector, Schur};

use crate::{Error, Result};

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE9: [f64; 10] =
    [17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0, 2162160.0, 110880.0, 3960.0, 90.0, 1.0];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// Largest 1-norms for which the [m/m] approximant reaches unit roundoff.
const THETA3: f64 = 1.495585217958292e-2;
#[allow(clippy::excessive_precision)]
const THETA5: f64 = 2.539398330063230e-1;
const THETA7: f64 = 9.504178996162932e-1;
const THETA9: f64 = 2.097847961257068;
const THETA13: f64 = 5.371920351148152;

fn one_norm(a: &DMatrix<f64>) -> f64 {
    a.column_iter().map(|c| c.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Odd/even parts (U, V) of a low-order diagonal Padé approximant.
fn pade_low(a: &DMatrix<f64>, b: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let a2 = a * a;
    let mut power = DMatrix::<f64>::identity(n, n);
    let mut u = DMatrix::<f64>::zeros(n, n);
    let mut v = DMatrix::<f64>::zeros(n, n);
    for k in 0..b.len() / 2 {
        v += &power * b[2 * k];
        u += &power * b[2 * k + 1];
        power = &power * &a2;
    }
    (a * u, v)
}

fn pade13(a: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let b = &PADE13;
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9]);
    let u = a * (inner_u + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &id * b[1]);
    let inner_v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]);
    let v = inner_v + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &id * b[0];
    (u, v)
}

/// Matrix exponential by scaling and squaring with diagonal Padé
/// approximants (Higham's 2005 selection of degree and scaling).
pub fn expm(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    assert!(a.is_square(), "expm needs a square matrix");
    let n = a.nrows();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::MatrixExponential("non-finite input entry".into()));
    }
    let norm = one_norm(a);
    let (u, v, squarings) = if norm <= THETA3 {
        let (u, v) = pade_low(a, &PADE3);
        (u, v, 0)
    } else if norm <= THETA5 {
        let (u, v) = pade_low(a, &PADE5);
        (u, v, 0)
    } else if norm <= THETA7 {
        let (u, v) = pade_low(a, &PADE7);
        (u, v, 0)
    } else if norm <= THETA9 {
        let (u, v) = pade_low(a, &PADE9);
        (u, v, 0)
    } else {
        let s = (norm / THETA13).log2().ceil().max(0.0) as i32;
        let scaled = a * 2f64.powi(-s);
        let (u, v) = pade13(&scaled);
        (u, v, s)
    };
    let numer = &v + &u;
    let denom = v - u;
    let mut result =
        denom.lu().solve(&numer).ok_or_else(|| Error::MatrixExponential("singular Padé denominator".into()))?;
    for _ in 0..squarings {
        result = &result * &result;
    }
    if result.iter().any(|x| !x.is_finite()) {
        return Err(Error::MatrixExponential("non-finite result".into()));
    }
    Ok(result)
}

/// Largest singular value (spectral norm).
pub fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    match a.shape() {
        (0, _) | (_, 0) => 0.0,
        (1, 1) => a[(0, 0)].abs(),
        (2, 2) => singular_values_2x2(a).0,
        _ => a.clone().svd(false, false).singular_values.max(),
    }
}

/// Smallest singular value of a square matrix.
pub fn min_singular_value(a: &DMatrix<f64>) -> f64 {
    match a.shape() {
        (0, _) | (_, 0) => f64::INFINITY,
        (1, 1) => a[(0, 0)].abs(),
        (2, 2) => singular_values_2x2(a).1,
        _ => a.clone().svd(false, false).singular_values.min(),
    }
}

/// (largest, smallest) singular values of a 2x2 matrix in closed form.
pub fn singular_values_2x2(a: &DMatrix<f64>) -> (f64, f64) {
    let (p, q, r, s) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
    let frob2 = p * p + q * q + r * r + s * s;
    let det = p * s - q * r;
    let disc = ((frob2 - 2.0 * det) * (frob2 + 2.0 * det)).max(0.0).sqrt();
    let big = ((frob2 + disc) / 2.0).sqrt();
    let small = if big > 0.0 { det.abs() / big } else { 0.0 };
    (big, small)
}

/// Eigenvalues (re, im) of a square matrix. 2x2 blocks use the
/// characteristic polynomial directly so that repeated roots stay exact.
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<(f64, f64)>> {
    match a.shape() {
        (0, _) => Ok(Vec::new()),
        (1, 1) => Ok(vec![(a[(0, 0)], 0.0)]),
        (2, 2) => {
            let tr = a[(0, 0)] + a[(1, 1)];
            let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
            let disc = tr * tr / 4.0 - det;
            Ok(if disc >= 0.0 {
                let r = disc.sqrt();
                vec![(tr / 2.0 - r, 0.0), (tr / 2.0 + r, 0.0)]
            } else {
                let r = (-disc).sqrt();
                vec![(tr / 2.0, -r), (tr / 2.0, r)]
            })
        }
        _ => {
            let n = a.nrows();
            // The Schur iteration can stall on highly structured matrices
            // (many repeated eigenvalues). Each retry applies a fixed
            // orthogonal similarity to break the structure and relaxes the
            // deflation threshold; neither changes the spectrum.
            let mut m = balance(a);
            for attempt in 0..6 {
                let eps = f64::EPSILON * 10f64.powi(attempt);
                if let Some(s) = Schur::try_new(m.clone(), eps, 500 * n) {
                    return Ok(s.complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect());
                }
                let w = DVector::from_fn(n, |i, _| ((i + 1) as f64 * (attempt as f64 + 1.618)).sin());
                let w = w.normalize();
                let h = DMatrix::identity(n, n) - &w * w.transpose() * 2.0;
                m = &h * m * &h;
            }
            Err(Error::Eigenvalues(format!("Schur iteration did not converge on a {n}x{n} matrix")))
        }
    }
}

/// Diagonal similarity `D⁻¹ A D` with power-of-two entries that evens out
/// row and column norms (Parlett and Reinsch). The spectrum is unchanged.
pub fn balance(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut converged = false;
    while !converged {
        converged = true;
        for i in 0..n {
            let c: f64 = (0..n).filter(|&j| j != i).map(|j| m[(j, i)].abs()).sum();
            let r: f64 = (0..n).filter(|&j| j != i).map(|j| m[(i, j)].abs()).sum();
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let mut f = 1.0;
            let (mut cc, s) = (c, c + r);
            while cc < r / 2.0 {
                cc *= 2.0;
                f *= 2.0;
            }
            while cc > r * 2.0 {
                cc /= 2.0;
                f /= 2.0;
            }
            if (cc + r / f) < 0.95 * s {
                converged = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
    m
}

/// Index sets of the connected components of the sparsity graph of `a`
/// (entries with `|a_ij| > 0` couple i and j). The matrix is block diagonal
/// after permuting by these sets. Components are sorted by smallest index.
pub fn decoupled_blocks(a: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = a.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && a[(i, j)] != 0.0 {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Principal submatrix on the given indices.
pub fn submatrix(a: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| a[(idx[i], idx[j])])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn taylor_exp(a: &DMatrix<f64>) -> DMatrix<f64> {
        // Independent oracle: scale down, sum 30 Taylor terms, square back.
        let s = 8;
        let scaled = a / 2f64.powi(s);
        let n = a.nrows();
        let mut term = DMatrix::<f64>::identity(n, n);
        let mut sum = term.clone();
        for k in 1..30 {
            term = &term * &scaled / k as f64;
            sum += &term;
        }
        for _ in 0..s {
            sum = &sum * &sum;
        }
        sum
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let z = DMatrix::<f64>::zeros(3, 3);
        assert_eq!(expm(&z).unwrap(), DMatrix::identity(3, 3));
    }

    #[test]
    fn rotation_generator() {
        let t = 1.3;
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -t, t, 0.0]);
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)] - t.cos()).abs() < 1e-14);
        assert!((e[(1, 0)] - t.sin()).abs() < 1e-14);
    }

    #[test]
    fn jordan_block_exact() {
        // exp([[-1, 1], [0, -1]] t) = e^{-t} [[1, t], [0, 1]]
        let t = 7.0;
        let a = DMatrix::from_row_slice(2, 2, &[-t, t, 0.0, -t]);
        let e = expm(&a).unwrap();
        let et = (-t).exp();
        assert!((e[(0, 0)] - et).abs() < 1e-15);
        assert!((e[(0, 1)] - t * et).abs() / (t * et) < 1e-12);
    }

    #[test]
    fn non_finite_rejected() {
        let a = DMatrix::from_row_slice(1, 1, &[f64::NAN]);
        assert!(expm(&a).is_err());
    }

    #[test]
    fn blocks_of_block_diagonal() {
        let mut a = DMatrix::<f64>::zeros(5, 5);
        a[(0, 3)] = 1.0;
        a[(3, 0)] = -1.0;
        a[(1, 2)] = 2.0;
        a[(4, 4)] = 3.0;
        assert_eq!(decoupled_blocks(&a), vec![vec![0, 3], vec![1, 2], vec![4]]);
    }

    #[test]
    fn two_by_two_singular_values_match_svd() {
        let a = DMatrix::from_row_slice(2, 2, &[0.3, -1.7, 2.2, 0.9]);
        let sv = a.clone().svd(false, false).singular_values;
        let (big, small) = singular_values_2x2(&a);
        assert!((big - sv.max()).abs() < 1e-14);
        assert!((small - sv.min()).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn expm_matches_taylor_oracle(entries in prop::collection::vec(-3.0f64..3.0, 16)) {
            let a = DMatrix::from_row_slice(4, 4, &entries);
            let e = expm(&a).unwrap();
            let o = taylor_exp(&a);
            let scale = o.norm().max(1.0);
            prop_assert!((e - o).norm() / scale < 1e-11);
        }
    }

    #[test]
    fn eigenvalues_survive_bad_scaling() {
        // D⁻¹ M D with M the second-difference matrix, whose eigenvalues
        // are 2 - 2cos(kπ/(n+1)).
        let n = 6;
        let m = DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => 2.0,
            1 => -1.0,
            _ => 0.0,
        });
        let d = DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| 10f64.powi(3 * i as i32 - 6)));
        let d_inv = d.map(|x| if x != 0.0 { 1.0 / x } else { 0.0 });
        let a = &d_inv * &m * &d;
        assert!(balance(&a).norm() < 0.1 * a.norm());
        let mut got: Vec<f64> = eigenvalues(&a).unwrap().iter().map(|e| e.0).collect();
        got.sort_by(f64::total_cmp);
        for (k, g) in got.iter().enumerate() {
            let want = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((g - want).abs() < 1e-8, "{g} vs {want}");
        }
    }
}
