use super::FemError;
use crate::math::Vec3;
use crate::mesh::Dim;

/// Symmetric tensor in Voigt order `[xx, yy, zz, yz, xz, xy]`.
///
/// Shear entries are tensor components (not engineering strains). Plane
/// problems use `xx`, `yy` and `xy` only.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymTensor(pub [f64; 6]);

impl SymTensor {
    pub const ZERO: SymTensor = SymTensor([0.0; 6]);

    pub fn plane(xx: f64, yy: f64, xy: f64) -> Self {
        SymTensor([xx, yy, 0.0, 0.0, 0.0, xy])
    }

    pub fn from_matrix(m: &[[f64; 3]; 3]) -> Self {
        SymTensor([
            m[0][0],
            m[1][1],
            m[2][2],
            0.5 * (m[1][2] + m[2][1]),
            0.5 * (m[0][2] + m[2][0]),
            0.5 * (m[0][1] + m[1][0]),
        ])
    }

    pub fn to_matrix(&self) -> [[f64; 3]; 3] {
        let s = &self.0;
        [[s[0], s[5], s[4]], [s[5], s[1], s[3]], [s[4], s[3], s[2]]]
    }

    pub fn trace(&self) -> f64 {
        self.0[0] + self.0[1] + self.0[2]
    }

    /// Double contraction `a : b`.
    pub fn ddot(&self, o: &SymTensor) -> f64 {
        let (a, b) = (&self.0, &o.0);
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + 2.0 * (a[3] * b[3] + a[4] * b[4] + a[5] * b[5])
    }

    /// Traction `σ n`.
    pub fn apply(&self, n: &Vec3) -> Vec3 {
        let m = self.to_matrix();
        [0, 1, 2].map(|i| m[i][0] * n[0] + m[i][1] * n[1] + m[i][2] * n[2])
    }

    pub fn add(&self, o: &SymTensor) -> SymTensor {
        SymTensor(core::array::from_fn(|i| self.0[i] + o.0[i]))
    }

    pub fn sub(&self, o: &SymTensor) -> SymTensor {
        SymTensor(core::array::from_fn(|i| self.0[i] - o.0[i]))
    }

    pub fn scale(&self, s: f64) -> SymTensor {
        SymTensor(self.0.map(|v| v * s))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Symmetric gradient `½(∇u + ∇uᵀ)` of a displacement gradient `g[i][j] = ∂u_i/∂x_j`.
    pub fn sym_grad(g: &[[f64; 3]; 3]) -> Self {
        SymTensor::from_matrix(g)
    }
}

/// Constitutive regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaterialMode {
    PlaneStress,
    ThreeD,
}

/// Isotropic linear elastic material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub young_modulus: f64,
    pub poisson_ratio: f64,
    pub mode: MaterialMode,
}

impl Material {
    pub fn new(young_modulus: f64, poisson_ratio: f64, mode: MaterialMode) -> Result<Self, FemError> {
        if !(young_modulus > 0.0) || !(poisson_ratio > -1.0 && poisson_ratio < 0.5) {
            return Err(FemError::InvalidMaterial { young_modulus, poisson_ratio });
        }
        Ok(Material { young_modulus, poisson_ratio, mode })
    }

    /// Material matching the mesh dimension (plane stress in 2D).
    pub fn for_dim(dim: Dim, young_modulus: f64, poisson_ratio: f64) -> Result<Self, FemError> {
        let mode = match dim {
            Dim::Two => MaterialMode::PlaneStress,
            Dim::Three => MaterialMode::ThreeD,
        };
        Material::new(young_modulus, poisson_ratio, mode)
    }

    pub fn dim(&self) -> Dim {
        match self.mode {
            MaterialMode::PlaneStress => Dim::Two,
            MaterialMode::ThreeD => Dim::Three,
        }
    }

    /// Effective Lamé parameters `(λ, μ)`; in plane stress `λ* = Eν/(1−ν²)`.
    pub fn lame(&self) -> (f64, f64) {
        let (e, nu) = (self.young_modulus, self.poisson_ratio);
        let mu = e / (2.0 * (1.0 + nu));
        let lambda = match self.mode {
            MaterialMode::PlaneStress => e * nu / (1.0 - nu * nu),
            MaterialMode::ThreeD => e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)),
        };
        (lambda, mu)
    }

    /// Hooke's law `σ = K ε`.
    pub fn hooke_apply(&self, eps: &SymTensor) -> SymTensor {
        let (lambda, mu) = self.lame();
        let e = &eps.0;
        match self.mode {
            MaterialMode::PlaneStress => {
                let tr = e[0] + e[1];
                SymTensor::plane(lambda * tr + 2.0 * mu * e[0], lambda * tr + 2.0 * mu * e[1], 2.0 * mu * e[5])
            }
            MaterialMode::ThreeD => {
                let tr = eps.trace();
                let mut s = eps.scale(2.0 * mu);
                for i in 0..3 {
                    s.0[i] += lambda * tr;
                }
                s
            }
        }
    }

    /// Compliance `ε = K⁻¹ σ`.
    pub fn compliance_apply(&self, sig: &SymTensor) -> SymTensor {
        let (e, nu) = (self.young_modulus, self.poisson_ratio);
        let s = &sig.0;
        match self.mode {
            MaterialMode::PlaneStress => {
                SymTensor::plane((s[0] - nu * s[1]) / e, (s[1] - nu * s[0]) / e, (1.0 + nu) * s[5] / e)
            }
            MaterialMode::ThreeD => {
                let tr = sig.trace();
                let mut out = sig.scale((1.0 + nu) / e);
                for i in 0..3 {
                    out.0[i] -= nu * tr / e;
                }
                out
            }
        }
    }

    /// Complementary energy density `σ : K⁻¹ σ` (twice the energy).
    pub fn stress_energy(&self, sig: &SymTensor) -> f64 {
        sig.ddot(&self.compliance_apply(sig))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn steel() -> Material {
        Material::new(1.0, 0.3, MaterialMode::PlaneStress).unwrap()
    }

    #[test]
    fn zero_strain_gives_zero_stress() {
        assert_eq!(steel().hooke_apply(&SymTensor::ZERO), SymTensor::ZERO);
    }

    #[test]
    fn uniaxial_plane_stress() {
        let s = steel().hooke_apply(&SymTensor::plane(1.0, -0.3, 0.0));
        assert!((s.0[0] - 1.0).abs() < 1e-15 && s.0[1].abs() < 1e-15);
    }

    #[test]
    fn pure_shear() {
        let s = steel().hooke_apply(&SymTensor::plane(0.0, 0.0, 1.0));
        assert!((s.0[5] - 1.0 / 1.3).abs() < 1e-15);
    }

    #[test]
    fn compliance_inverts_hooke() {
        for m in [steel(), Material::new(210.0, 0.28, MaterialMode::ThreeD).unwrap()] {
            let eps = if m.mode == MaterialMode::ThreeD {
                SymTensor([0.1, -0.2, 0.3, 0.05, -0.07, 0.11])
            } else {
                SymTensor::plane(0.1, -0.2, 0.11)
            };
            let back = m.compliance_apply(&m.hooke_apply(&eps));
            for i in 0..6 {
                assert!((back.0[i] - eps.0[i]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn invalid_materials_are_rejected() {
        assert!(Material::new(0.0, 0.3, MaterialMode::ThreeD).is_err());
        assert!(Material::new(1.0, 0.5, MaterialMode::ThreeD).is_err());
    }
}
