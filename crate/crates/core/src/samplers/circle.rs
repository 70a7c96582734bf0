use nalgebra::DMatrix;

use crate::{Error, Result};

/// Index of the lifted state `(x, v)` with `v = ±1`: `x` for `v = +1`, `x + n` for `v = −1`.
pub fn lifted_index(n: usize, x: usize, v: i8) -> usize {
    if v >= 0 {
        x
    } else {
        x + n
    }
}

/// Symmetric nearest-neighbour walk on `Z/nZ` and its lift on `Z/nZ × {±1}`.
///
/// The lift moves `x ← x + v mod n` and then flips `v` with probability `eps`.
pub fn circle_chains(n: usize, eps: f64) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if n < 2 {
        return Err(Error::invalid("n", "circle needs at least two sites"));
    }
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::invalid("eps", "flip probability must lie in [0, 1]"));
    }
    let mut base = DMatrix::zeros(n, n);
    for x in 0..n {
        base[(x, (x + 1) % n)] += 0.5;
        base[(x, (x + n - 1) % n)] += 0.5;
    }
    let mut lift = DMatrix::zeros(2 * n, 2 * n);
    for x in 0..n {
        for v in [1i8, -1] {
            let y = if v > 0 { (x + 1) % n } else { (x + n - 1) % n };
            let from = lifted_index(n, x, v);
            lift[(from, lifted_index(n, y, v))] += 1.0 - eps;
            lift[(from, lifted_index(n, y, -v))] += eps;
        }
    }
    Ok((base, lift))
}
