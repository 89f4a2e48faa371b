//! Minimal fixed-size linear algebra for the three-dimensional reduced space.

use crate::math;

/// Real 3-vector.
pub type Vec3 = [f64; 3];

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: &Vec3) -> f64 {
    math::sqrt(dot(a, a))
}

pub fn scale(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn max_abs_diff3(a: &Vec3, b: &Vec3) -> f64 {
    let mut m = 0.0;
    for i in 0..3 {
        m = math::fmax(m, math::abs(a[i] - b[i]));
    }
    m
}

/// Row-major real 3x3 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const ZERO: Mat3 = Mat3([[0.0; 3]; 3]);

    pub fn identity() -> Mat3 {
        Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    pub fn mul_vec(&self, v: &Vec3) -> Vec3 {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    pub fn mul(&self, rhs: &Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    s += self.0[i][k] * rhs.0[k][j];
                }
                out[i][j] = s;
            }
        }
        Mat3(out)
    }

    pub fn transpose(&self) -> Mat3 {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn add(&self, rhs: &Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = self.0[i][j] + rhs.0[i][j];
            }
        }
        Mat3(out)
    }

    pub fn sub(&self, rhs: &Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = self.0[i][j] - rhs.0[i][j];
            }
        }
        Mat3(out)
    }

    pub fn scaled(&self, s: f64) -> Mat3 {
        let mut out = self.0;
        for row in &mut out {
            for x in row {
                *x *= s;
            }
        }
        Mat3(out)
    }

    /// Exponentiation by squaring.
    pub fn pow(&self, mut k: u64) -> Mat3 {
        let mut base = *self;
        let mut acc = Mat3::identity();
        while k > 0 {
            if k & 1 == 1 {
                acc = base.mul(&acc);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0;
        for row in &self.0 {
            for &x in row {
                m = math::fmax(m, math::abs(x));
            }
        }
        m
    }

    pub fn max_abs_diff(&self, rhs: &Mat3) -> f64 {
        self.sub(rhs).max_abs()
    }

    /// Largest entry of |M^T M - I|.
    pub fn orthogonality_defect(&self) -> f64 {
        self.transpose().mul(self).max_abs_diff(&Mat3::identity())
    }
}
