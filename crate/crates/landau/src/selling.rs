//! Selling's decomposition of a 3×3 positive definite matrix into
//! nonnegative weights on integer offsets, S = Σ ρ_e e eᵀ. Used to build
//! monotone (M-matrix) diffusion stencils for anisotropic tensors.

use crate::sym3::{self, Sym3};

pub type Offset = [i64; 3];

fn cross(a: Offset, b: Offset) -> Offset {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn sdot(s: &Sym3, a: Offset, b: Offset) -> f64 {
    sym3::quad(s, a.map(|x| x as f64), b.map(|x| x as f64))
}

/// Six (weight, offset) pairs with weight ≥ 0 and Σ ρ e eᵀ = S. Offsets are
/// defined up to sign. Returns None if the reduction does not terminate,
/// which only happens for matrices that are not positive definite.
pub fn decompose(s: &Sym3) -> Option<[(f64, Offset); 6]> {
    let mut b: [Offset; 4] = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [-1, -1, -1]];
    let tol = 1e-14 * sym3::trace(s).abs();
    for _ in 0..200 {
        let mut flipped = false;
        'search: for i in 0..4 {
            for j in i + 1..4 {
                if sdot(s, b[i], b[j]) > tol {
                    let bi = b[i];
                    for k in 0..4 {
                        if k != i && k != j {
                            b[k] = [b[k][0] + bi[0], b[k][1] + bi[1], b[k][2] + bi[2]];
                        }
                    }
                    b[i] = bi.map(|x| -x);
                    flipped = true;
                    break 'search;
                }
            }
        }
        if !flipped {
            let mut out = [(0.0, [0; 3]); 6];
            let mut c = 0;
            for i in 0..4 {
                for j in i + 1..4 {
                    let kl: Vec<usize> = (0..4).filter(|&k| k != i && k != j).collect();
                    out[c] = ((-sdot(s, b[i], b[j])).max(0.0), cross(b[kl[0]], b[kl[1]]));
                    c += 1;
                }
            }
            return Some(out);
        }
    }
    None
}
