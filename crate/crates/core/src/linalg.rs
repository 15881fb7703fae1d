//! Small dense helpers on top of nalgebra for k×k coefficient matrices.

use nalgebra::{DMatrix, DVector};

pub fn is_symmetric(m: &DMatrix<f64>) -> bool {
    if !m.is_square() {
        return false;
    }
    let scale = m.amax().max(1.0);
    for i in 0..m.nrows() {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                return false;
            }
        }
    }
    true
}

pub fn all_finite(m: &DMatrix<f64>) -> bool {
    m.iter().all(|x| x.is_finite())
}

/// Eigenvalues of a symmetric matrix, ascending. `None` when the input is not finite.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Option<Vec<f64>> {
    if !all_finite(m) || !m.is_square() {
        return None;
    }
    let mut ev: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    Some(ev)
}

pub fn is_spd(m: &DMatrix<f64>) -> bool {
    is_symmetric(m) && sym_eigenvalues(m).is_some_and(|ev| ev.iter().all(|&e| e > 0.0))
}

pub fn is_sym_psd(m: &DMatrix<f64>) -> bool {
    is_symmetric(m)
        && sym_eigenvalues(m).is_some_and(|ev| {
            let tol = 1e-14 * ev.iter().fold(1.0f64, |a, &e| a.max(e.abs()));
            ev.iter().all(|&e| e >= -tol)
        })
}

/// Symmetric square root `M^{1/2}` and inverse root `M^{-1/2}` of an SPD matrix.
pub fn spd_sqrt_pair(m: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let eig = m.clone().symmetric_eigen();
    let q = &eig.eigenvectors;
    let sqrt = DVector::from_iterator(eig.eigenvalues.len(), eig.eigenvalues.iter().map(|e| e.sqrt()));
    let inv_sqrt = sqrt.map(|s| 1.0 / s);
    (
        q * DMatrix::from_diagonal(&sqrt) * q.transpose(),
        q * DMatrix::from_diagonal(&inv_sqrt) * q.transpose(),
    )
}

/// Modal data of `mass · psi_tt = stiffness · psi_zz` for SPD `mass`, `stiffness`.
#[derive(Debug, Clone)]
pub struct WaveModes {
    /// Wave speeds `sqrt(eig(mass^{-1} stiffness))`, ascending.
    pub speeds: Vec<f64>,
    /// Characteristic speed matrix `C` with right-going solutions satisfying `psi_t + C psi_z = 0`.
    pub speed_matrix: DMatrix<f64>,
    /// Characteristic impedance `stiffness · C^{-1}` (symmetric, positive definite).
    pub impedance: DMatrix<f64>,
}

pub fn wave_modes(mass: &DMatrix<f64>, stiffness: &DMatrix<f64>) -> WaveModes {
    let (m_half, m_inv_half) = spd_sqrt_pair(mass);
    let reduced = &m_inv_half * stiffness * &m_inv_half;
    let reduced = (&reduced + reduced.transpose()) * 0.5;
    let eig = reduced.symmetric_eigen();
    let q = &eig.eigenvectors;
    let speeds_vec = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|e| e.max(0.0).sqrt()),
    );
    let root = q * DMatrix::from_diagonal(&speeds_vec) * q.transpose();
    let speed_matrix = &m_inv_half * &root * &m_half;
    let impedance = &m_half * &root * &m_half;
    let mut speeds: Vec<f64> = speeds_vec.iter().copied().collect();
    speeds.sort_by(|a, b| a.total_cmp(b));
    WaveModes { speeds, speed_matrix, impedance }
}

/// `y = m x` for a k×k matrix applied to a slice.
#[inline]
pub fn mat_vec(m: &DMatrix<f64>, x: &[f64], y: &mut [f64]) {
    let k = x.len();
    for (i, yi) in y.iter_mut().enumerate().take(k) {
        let mut acc = 0.0;
        for (j, xj) in x.iter().enumerate() {
            acc += m[(i, j)] * xj;
        }
        *yi = acc;
    }
}

pub fn quad_form(m: &DMatrix<f64>, x: &[f64], y: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (i, xi) in x.iter().enumerate() {
        for (j, yj) in y.iter().enumerate() {
            acc += xi * m[(i, j)] * yj;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_wave_modes() {
        let m = DMatrix::from_element(1, 1, 4.0);
        let k = DMatrix::from_element(1, 1, 9.0);
        let w = wave_modes(&m, &k);
        assert!((w.speeds[0] - 1.5).abs() < 1e-14);
        assert!((w.speed_matrix[(0, 0)] - 1.5).abs() < 1e-14);
        // impedance sqrt(rho T) = 6
        assert!((w.impedance[(0, 0)] - 6.0).abs() < 1e-13);
    }

    #[test]
    fn matrix_speed_squares_to_operator() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let k = DMatrix::from_row_slice(2, 2, &[1.0, -0.2, -0.2, 3.0]);
        let w = wave_modes(&m, &k);
        let p = m.clone().try_inverse().unwrap() * &k;
        let c2 = &w.speed_matrix * &w.speed_matrix;
        assert!((c2 - p).amax() < 1e-12);
        assert!(is_symmetric(&w.impedance));
        // impedance = K C^{-1}
        let z = &k * w.speed_matrix.clone().try_inverse().unwrap();
        assert!((z - &w.impedance).amax() < 1e-12);
    }

    #[test]
    fn spd_detection() {
        assert!(is_spd(&DMatrix::identity(3, 3)));
        assert!(!is_spd(&DMatrix::from_element(1, 1, -1.0)));
        assert!(!is_spd(&DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0])));
        assert!(!is_spd(&DMatrix::from_element(1, 1, f64::NAN)));
        assert!(is_sym_psd(&DMatrix::zeros(2, 2)));
    }
}
