use serde::{Deserialize, Serialize};

/// S-shaped rectified linear unit with learnable knots and outer slopes:
///
/// ```text
/// y = t_left  + a_left  * (x - t_left)    for x <= t_left
/// y = x                                   for t_left < x < t_right
/// y = t_right + a_right * (x - t_right)   for x >= t_right
/// ```
///
/// The same struct stores parameter gradients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Srelu {
    pub t_left: f64,
    pub a_left: f64,
    pub t_right: f64,
    pub a_right: f64,
}

impl Default for Srelu {
    /// ReLU-like start: flat below 0, identity above.
    fn default() -> Self {
        Self {
            t_left: 0.0,
            a_left: 0.0,
            t_right: 1.0,
            a_right: 1.0,
        }
    }
}

impl Srelu {
    pub const ZERO: Srelu = Srelu {
        t_left: 0.0,
        a_left: 0.0,
        t_right: 0.0,
        a_right: 0.0,
    };

    pub fn new(t_left: f64, a_left: f64, t_right: f64, a_right: f64) -> Self {
        Self {
            t_left,
            a_left,
            t_right,
            a_right,
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        // both outer branches are computed so the selects compile branch-free
        let left = self.t_left + self.a_left * (x - self.t_left);
        let right = self.t_right + self.a_right * (x - self.t_right);
        let y = if x >= self.t_right { right } else { x };
        if x <= self.t_left {
            left
        } else {
            y
        }
    }

    /// `dy/dx` and the parameter gradient scaled by `upstream`.
    ///
    /// Exactly at a knot the branch of [`Srelu::eval`] is used for `dy/dx`
    /// and the knot/slope parameters receive a zero subgradient.
    pub fn backward(&self, x: f64, upstream: f64) -> (f64, Srelu) {
        let mut g = Srelu::ZERO;
        if x <= self.t_left {
            if x != self.t_left {
                g.t_left = upstream * (1.0 - self.a_left);
                g.a_left = upstream * (x - self.t_left);
            }
            (upstream * self.a_left, g)
        } else if x >= self.t_right {
            if x != self.t_right {
                g.t_right = upstream * (1.0 - self.a_right);
                g.a_right = upstream * (x - self.t_right);
            }
            (upstream * self.a_right, g)
        } else {
            (upstream, g)
        }
    }

    pub(crate) fn as_array(&self) -> [f64; 4] {
        [self.t_left, self.a_left, self.t_right, self.a_right]
    }

    pub(crate) fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }
}

/// Backward pass over one neuron's column of pre-activations `x`: `grad`
/// holds upstream gradients and is overwritten with `dy/dx` times upstream.
/// Returns the summed parameter gradient.
pub(crate) fn backward_column(p: &Srelu, x: &[f64], grad: &mut [f64]) -> Srelu {
    let mut acc = [0.0; 4];
    for (g, &x) in grad.iter_mut().zip(x) {
        let up = *g;
        let left = x <= p.t_left;
        let right = !left && x >= p.t_right;
        let slope = if left {
            p.a_left
        } else if right {
            p.a_right
        } else {
            1.0
        };
        *g = up * slope;
        let strict_left = left && x != p.t_left;
        let strict_right = right && x != p.t_right;
        acc[0] += if strict_left { up * (1.0 - p.a_left) } else { 0.0 };
        acc[1] += if strict_left { up * (x - p.t_left) } else { 0.0 };
        acc[2] += if strict_right { up * (1.0 - p.a_right) } else { 0.0 };
        acc[3] += if strict_right { up * (x - p.t_right) } else { 0.0 };
    }
    Srelu::from_array(acc)
}

/// Free-function form of [`Srelu::eval`].
pub fn srelu(x: f64, params: &Srelu) -> f64 {
    params.eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_relu_below_identity_above() {
        let p = Srelu::default();
        assert_eq!(srelu(-2.0, &p), 0.0);
        assert_eq!(srelu(0.0, &p), 0.0);
        assert_eq!(srelu(0.4, &p), 0.4);
        assert_eq!(srelu(1.0, &p), 1.0);
        assert_eq!(srelu(3.5, &p), 3.5);
    }

    #[test]
    fn continuous_at_knots() {
        let p = Srelu::new(-1.0, 0.1, 2.0, 0.5);
        assert_eq!(srelu(-1.0, &p), -1.0);
        assert_eq!(srelu(2.0, &p), 2.0);
        assert!((srelu(-1.0 - 1e-12, &p) - -1.0).abs() < 1e-12);
    }

    #[test]
    fn hand_computed_values() {
        let p = Srelu::new(-1.0, 0.1, 2.0, 0.5);
        assert_eq!(srelu(4.0, &p), 3.0);
        assert!((srelu(-3.0, &p) - (-1.0 + 0.1 * -2.0)).abs() < 1e-15);
        assert_eq!(srelu(0.5, &p), 0.5);
    }

    #[test]
    fn column_backward_matches_scalar() {
        let p = Srelu::new(-1.0, 0.1, 2.0, 0.5);
        let x = [-3.0, -1.0, 0.5, 2.0, 4.0];
        let up = [1.0, 2.0, 3.0, 4.0, 5.0];
        let mut g = up;
        let sum = backward_column(&p, &x, &mut g);
        let mut expect = Srelu::ZERO;
        for i in 0..5 {
            let (dx, gp) = p.backward(x[i], up[i]);
            assert_eq!(g[i], dx);
            expect.t_left += gp.t_left;
            expect.a_left += gp.a_left;
            expect.t_right += gp.t_right;
            expect.a_right += gp.a_right;
        }
        assert_eq!(sum, expect);
    }

    #[test]
    fn knot_subgradient_is_zero() {
        let p = Srelu::new(-1.0, 0.1, 2.0, 0.5);
        let (dx, g) = p.backward(-1.0, 1.0);
        assert_eq!(dx, 0.1);
        assert_eq!(g, Srelu::ZERO);
        let (dx, g) = p.backward(2.0, 1.0);
        assert_eq!(dx, 0.5);
        assert_eq!(g, Srelu::ZERO);
    }
}
