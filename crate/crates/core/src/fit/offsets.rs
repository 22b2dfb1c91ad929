use crate::error::{check_len, Result};
use crate::geometry::{RegionPartition, Vec3};

/// Per-vertex offset coefficients `m` applied along fixed normals.
///
/// `displacement_i = m_i ⊙ n_i` on movable (hair and neck) vertices and
/// exactly zero on face and ear vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct OffsetField {
    coefficients: Vec<Vec3>,
    normals: Vec<Vec3>,
    movable: Vec<bool>,
}

impl OffsetField {
    /// Zero field over the given normals and partition.
    pub fn zeros(normals: Vec<Vec3>, regions: &RegionPartition) -> Result<Self> {
        check_len("region labels", normals.len(), regions.len())?;
        let movable = regions.labels().iter().map(|r| !r.is_fixed()).collect();
        Ok(Self {
            coefficients: vec![Vec3::zeros(); normals.len()],
            normals,
            movable,
        })
    }

    /// Replaces the coefficients; rows on fixed vertices are zeroed.
    pub fn with_coefficients(mut self, coefficients: Vec<Vec3>) -> Result<Self> {
        check_len("offset coefficients", self.normals.len(), coefficients.len())?;
        self.coefficients = coefficients;
        self.mask_fixed();
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.normals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normals.is_empty()
    }

    pub fn coefficients(&self) -> &[Vec3] {
        &self.coefficients
    }

    pub fn normals(&self) -> &[Vec3] {
        &self.normals
    }

    pub fn movable(&self) -> &[bool] {
        &self.movable
    }

    pub(crate) fn coefficients_mut(&mut self) -> &mut [Vec3] {
        &mut self.coefficients
    }

    pub(crate) fn mask_fixed(&mut self) {
        for (c, &m) in self.coefficients.iter_mut().zip(&self.movable) {
            if !m {
                *c = Vec3::zeros();
            }
        }
    }

    /// `Δv_i = m_i ⊙ n_i`, zero on fixed rows.
    pub fn displacements(&self) -> Vec<Vec3> {
        self.coefficients
            .iter()
            .zip(&self.normals)
            .zip(&self.movable)
            .map(|((m, n), &mv)| if mv { m.component_mul(n) } else { Vec3::zeros() })
            .collect()
    }

    /// Pulls a gradient with respect to displacements back to coefficients.
    pub fn coefficient_grad(&self, displacement_grad: &[Vec3]) -> Vec<Vec3> {
        displacement_grad
            .iter()
            .zip(&self.normals)
            .zip(&self.movable)
            .map(|((g, n), &mv)| if mv { g.component_mul(n) } else { Vec3::zeros() })
            .collect()
    }
}

/// `v_t + m ⊙ n`; face and ear rows are copied from `base` unchanged.
pub fn apply_offsets(base: &[Vec3], field: &OffsetField) -> Result<Vec<Vec3>> {
    check_len("base vertices", field.len(), base.len())?;
    Ok(base
        .iter()
        .zip(field.displacements())
        .zip(field.movable())
        .map(|((v, d), &mv)| if mv { v + d } else { *v })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Region;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(rng: &mut ChaCha8Rng, n: usize) -> (Vec<Vec3>, OffsetField) {
        let labels: Vec<Region> = (0..n).map(|i| Region::ALL[i % 4]).collect();
        let regions = RegionPartition::new(labels);
        let normals = (0..n)
            .map(|_| Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)).normalize())
            .collect();
        let base = (0..n).map(|_| Vec3::new(rng.random(), rng.random(), rng.random())).collect();
        (base, OffsetField::zeros(normals, &regions).unwrap())
    }

    #[test]
    fn zero_field_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (base, field) = setup(&mut rng, 12);
        assert_eq!(apply_offsets(&base, &field).unwrap(), base);
    }

    #[test]
    fn unit_coefficient_moves_along_normal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (base, field) = setup(&mut rng, 8);
        // labels cycle through Region::ALL, so vertex 2 is hair
        let hair = 2;
        let mut m = vec![Vec3::zeros(); 8];
        m[hair] = Vec3::new(1.0, 1.0, 1.0);
        let field = field.with_coefficients(m).unwrap();
        let out = apply_offsets(&base, &field).unwrap();
        assert_eq!(out[hair], base[hair] + field.normals()[hair]);
    }

    #[test]
    fn fixed_rows_are_bit_equal_seed_13() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let (base, field) = setup(&mut rng, 40);
        let m = (0..40).map(|_| Vec3::new(rng.random(), rng.random(), rng.random()) * 5.0).collect();
        let field = field.with_coefficients(m).unwrap();
        let out = apply_offsets(&base, &field).unwrap();
        for i in 0..40 {
            if !field.movable()[i] {
                assert_eq!(out[i], base[i]);
                assert_eq!(field.coefficients()[i], Vec3::zeros());
            } else {
                assert_ne!(out[i], base[i]);
            }
        }
    }

    #[test]
    fn length_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (base, field) = setup(&mut rng, 4);
        assert!(apply_offsets(&base[..3], &field).is_err());
        assert!(field.with_coefficients(vec![Vec3::zeros(); 5]).is_err());
    }
}
