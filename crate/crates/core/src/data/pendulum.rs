use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{Dataset, Source};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::tensor::{ImageBatch, ImageDims};

/// Damped pendulum rendered as a white bob on a black frame.
///
/// Angles follow the small-angle closed form `θ(t) = θ0·e^{−γt}·cos(ωt)`,
/// measured from the downward vertical, with frame `n` at `t = n·dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumParams {
    pub omega: f64,
    pub gamma: f64,
    pub theta0: f64,
    pub dt: f64,
    pub frames: usize,
    pub height: usize,
    pub width: usize,
    /// Pivot column and row, in pixels.
    pub pivot: (f64, f64),
    pub rod_length: f64,
    pub bob_radius: f64,
    /// Draw a thin rod from the pivot to the bob.
    pub rod: bool,
    /// Standard deviation of additive Gaussian noise (clamped to `[0, 1]`).
    pub noise_std: f64,
}

impl Default for PendulumParams {
    fn default() -> Self {
        Self {
            omega: 0.3,
            gamma: 0.02,
            theta0: 1.2,
            dt: 1.0,
            frames: 500,
            height: 64,
            width: 64,
            pivot: (32.0, 12.0),
            rod_length: 26.0,
            bob_radius: 4.0,
            rod: false,
            noise_std: 0.0,
        }
    }
}

impl PendulumParams {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.gamma.is_nan() || self.gamma < 0.0 {
            problems.push(format!("damping must be non-negative, got {}", self.gamma));
        }
        if self.height == 0 || self.width == 0 {
            problems.push("frame size must be positive".to_string());
        }
        if self.frames == 0 {
            problems.push("frame count must be positive".to_string());
        }
        if self.dt.is_nan() || self.dt <= 0.0 || !self.omega.is_finite() || !self.theta0.is_finite()
        {
            problems.push("dt must be positive and omega/theta0 finite".to_string());
        }
        let radius_ok = self.bob_radius > 0.0;
        if !radius_ok || self.rod_length.is_nan() || self.rod_length < 0.0 {
            problems.push("bob radius must be positive and rod length non-negative".to_string());
        }
        if self.noise_std.is_nan() || self.noise_std < 0.0 {
            problems.push("noise std must be non-negative".to_string());
        }
        if !problems.is_empty() {
            return Err(Error::Config(problems.join("; ")));
        }
        // The bob must fit for every |θ| ≤ |θ0|.
        let amp = self.theta0.abs();
        let steps = 2000;
        for i in 0..=steps {
            let theta = -amp + 2.0 * amp * i as f64 / steps as f64;
            let (x, y) = self.bob_center(theta);
            let r = self.bob_radius;
            if x - r < 0.0 || y - r < 0.0 || x + r > self.width as f64 || y + r > self.height as f64
            {
                return Err(Error::Config(format!(
                    "bob leaves the {}x{} frame at θ = {theta:.3}",
                    self.width, self.height
                )));
            }
        }
        Ok(())
    }

    pub fn bob_center(&self, theta: f64) -> (f64, f64) {
        (
            self.pivot.0 + self.rod_length * theta.sin(),
            self.pivot.1 + self.rod_length * theta.cos(),
        )
    }

    pub fn dims(&self) -> ImageDims {
        ImageDims::new(1, self.height, self.width)
    }
}

/// `θ0·e^{−γt}·cos(ωt)`
pub fn angle_at(p: &PendulumParams, t: f64) -> f64 {
    p.theta0 * (-p.gamma * t).exp() * (p.omega * t).cos()
}

/// 2×2 supersampled coverage of the bob (and optionally the rod).
fn render(p: &PendulumParams, theta: f64, out: &mut [f64]) {
    let (cx, cy) = p.bob_center(theta);
    let r2 = p.bob_radius * p.bob_radius;
    const OFFSETS: [f64; 2] = [0.25, 0.75];
    for row in 0..p.height {
        for col in 0..p.width {
            let mut hits = 0u32;
            for oy in OFFSETS {
                for ox in OFFSETS {
                    let x = col as f64 + ox;
                    let y = row as f64 + oy;
                    let bob = (x - cx).powi(2) + (y - cy).powi(2) <= r2;
                    let rod = p.rod && segment_distance((x, y), p.pivot, (cx, cy)) <= 0.5;
                    if bob || rod {
                        hits += 1;
                    }
                }
            }
            out[row * p.width + col] = hits as f64 / 4.0;
        }
    }
}

fn segment_distance(q: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((q.0 - a.0) * dx + (q.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    ((q.0 - a.0 - t * dx).powi(2) + (q.1 - a.1 - t * dy).powi(2)).sqrt()
}

pub fn simulate_pendulum(params: &PendulumParams, seed: u64) -> Result<Dataset> {
    simulate_pendulum_with(params, seed, Exec::default())
}

/// Renders every frame; frames are independent and render in parallel.
pub fn simulate_pendulum_with(params: &PendulumParams, seed: u64, exec: Exec) -> Result<Dataset> {
    params.validate()?;
    let dims = params.dims();
    let angles: Vec<f64> = (0..params.frames)
        .map(|n| angle_at(params, n as f64 * params.dt))
        .collect();
    let mut values = vec![0.0; params.frames * dims.len()];
    exec.for_each_chunk_mut(&mut values, dims.len(), |n, frame| {
        render(params, angles[n], frame)
    });

    if params.noise_std > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, params.noise_std).map_err(|e| Error::Config(e.to_string()))?;
        for v in &mut values {
            *v = (*v + noise.sample(&mut rng)).clamp(0.0, 1.0);
        }
    }
    let frames = ImageBatch::new(params.frames, dims, values)?;
    Dataset::new(frames, Some(angles), Source::Simulated)
}
