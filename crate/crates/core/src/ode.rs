//! Dormand–Prince 5(4) for planar autonomous systems.

pub type Vec2 = [f64; 2];

#[derive(Clone, Copy, Debug)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub h_min: f64,
}

/// One accepted step from `y0` to `y1` of size `h`.
#[derive(Clone, Copy, Debug)]
pub struct Step {
    pub y0: Vec2,
    pub y1: Vec2,
    pub h: f64,
}

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

impl Default for Dopri5 {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-11,
            h_max: 0.02,
            h_min: 1e-13,
        }
    }
}

impl Dopri5 {
    pub fn with_tol(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }

    /// A single non-adaptive step; returns the 5th-order solution and the
    /// scaled error estimate. `None` if `f` fails at a stage.
    pub fn step<F>(&self, f: &mut F, y: Vec2, h: f64) -> Option<(Vec2, f64)>
    where
        F: FnMut(Vec2) -> Option<Vec2>,
    {
        let mut k = [[0.0; 2]; 7];
        for s in 0..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                ys[0] += h * A[s][j] * kj[0];
                ys[1] += h * A[s][j] * kj[1];
            }
            k[s] = f(ys)?;
        }
        let mut y5 = y;
        let mut e = [0.0; 2];
        for s in 0..7 {
            for d in 0..2 {
                y5[d] += h * B5[s] * k[s][d];
                e[d] += h * (B5[s] - B4[s]) * k[s][d];
            }
        }
        let mut err: f64 = 0.0;
        for d in 0..2 {
            let sc = self.atol + self.rtol * y[d].abs().max(y5[d].abs());
            err = err.max(e[d].abs() / sc);
        }
        Some((y5, err))
    }

    /// Takes one accepted adaptive step, updating the suggested step size.
    /// A negative `h` integrates backwards.
    pub fn adaptive<F>(&self, f: &mut F, y: Vec2, h: &mut f64) -> Option<Step>
    where
        F: FnMut(Vec2) -> Option<Vec2>,
    {
        let dir = h.signum();
        let mut mag = h.abs().min(self.h_max);
        loop {
            if mag < self.h_min {
                return None;
            }
            match self.step(f, y, dir * mag) {
                Some((y1, err)) if err <= 1.0 => {
                    let fac = if err == 0.0 {
                        5.0
                    } else {
                        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                    };
                    *h = dir * (mag * fac).min(self.h_max);
                    return Some(Step {
                        y0: y,
                        y1,
                        h: dir * mag,
                    });
                }
                Some((_, err)) => {
                    mag *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.5);
                }
                None => mag *= 0.25,
            }
        }
    }

    /// Finds `θ ∈ (0, 1]` where `g` changes sign along `step`, by bisection
    /// on re-stepped partial steps of size `θh`. Returns `(θ, y(θh))`.
    pub fn locate<F, G>(&self, f: &mut F, step: &Step, mut g: G) -> Option<(f64, Vec2)>
    where
        F: FnMut(Vec2) -> Option<Vec2>,
        G: FnMut(Vec2) -> f64,
    {
        let g0 = g(step.y0);
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        let mut y_hi = step.y1;
        if g0 * g(step.y1) > 0.0 {
            return None;
        }
        for _ in 0..200 {
            if (hi - lo) * step.h.abs() < 1e-15 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let (ym, _) = self.step(f, step.y0, mid * step.h)?;
            if g0 * g(ym) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
                y_hi = ym;
            }
        }
        Some((hi, y_hi))
    }
}
