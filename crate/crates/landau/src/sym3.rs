//! Symmetric 3×3 matrices stored as upper triangles [xx, xy, xz, yy, yz, zz].

pub type Sym3 = [f64; 6];

pub const SYM_IDX: [[usize; 3]; 3] = [[0, 1, 2], [1, 3, 4], [2, 4, 5]];
/// (i, j) of each stored component.
pub const SYM_PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

#[inline]
pub fn get(s: &Sym3, i: usize, j: usize) -> f64 {
    s[SYM_IDX[i][j]]
}

#[inline]
pub fn matvec(s: &Sym3, x: [f64; 3]) -> [f64; 3] {
    [
        s[0] * x[0] + s[1] * x[1] + s[2] * x[2],
        s[1] * x[0] + s[3] * x[1] + s[4] * x[2],
        s[2] * x[0] + s[4] * x[1] + s[5] * x[2],
    ]
}

#[inline]
pub fn quad(s: &Sym3, a: [f64; 3], b: [f64; 3]) -> f64 {
    let m = matvec(s, b);
    a[0] * m[0] + a[1] * m[1] + a[2] * m[2]
}

#[inline]
pub fn trace(s: &Sym3) -> f64 {
    s[0] + s[3] + s[5]
}

#[inline]
pub fn add(a: &Sym3, b: &Sym3) -> Sym3 {
    std::array::from_fn(|c| a[c] + b[c])
}

pub fn to_matrix(s: &Sym3) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| get(s, i, j)))
}

pub fn from_matrix(m: &[[f64; 3]; 3]) -> Sym3 {
    std::array::from_fn(|c| {
        let (i, j) = SYM_PAIRS[c];
        m[i][j]
    })
}

/// Eigenvalues ascending with unit eigenvectors as columns.
pub fn eigen(s: &Sym3) -> ([f64; 3], [[f64; 3]; 3]) {
    let m = nalgebra::Matrix3::from_fn(|i, j| get(s, i, j));
    let e = nalgebra::SymmetricEigen::new(m);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let vals = order.map(|c| e.eigenvalues[c]);
    let mut vecs = [[0.0; 3]; 3];
    for (col, &c) in order.iter().enumerate() {
        for r in 0..3 {
            vecs[r][col] = e.eigenvectors[(r, c)];
        }
    }
    (vals, vecs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_of_diagonal() {
        let (l, v) = eigen(&[3.0, 0.0, 0.0, 1.0, 0.0, 2.0]);
        assert_eq!(l, [1.0, 2.0, 3.0]);
        assert!((v[1][0].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn matrix_round_trip() {
        let s = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        assert_eq!(from_matrix(&to_matrix(&s)), s);
        assert_eq!(quad(&s, [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]), 2.0);
    }
}
