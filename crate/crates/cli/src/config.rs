use clap::Args;
use hypoisson_core::{Complex64, SpectralParams};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

/// Fully resolved run configuration, echoed into every CSV header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub mu_re: f64,
    pub mu_im: f64,
    pub quad_level: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub t_steps: usize,
    pub r_values: Vec<f64>,
    /// Number of random forms or evaluation points.
    pub samples: usize,
    pub seed: u64,
    pub out_path: Option<String>,
}

/// Partial configuration as read from a JSON file; missing fields take the
/// subcommand defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    n: Option<usize>,
    p: Option<usize>,
    q: Option<usize>,
    mu_re: Option<f64>,
    mu_im: Option<f64>,
    quad_level: Option<usize>,
    t_min: Option<f64>,
    t_max: Option<f64>,
    t_steps: Option<usize>,
    r_values: Option<Vec<f64>>,
    samples: Option<usize>,
    seed: Option<u64>,
    out_path: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// JSON file with any subset of the configuration fields
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Dimension of the hyperbolic space
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Degree of the forms on H^n
    #[arg(long, global = true)]
    pub p: Option<usize>,
    /// Degree of the boundary forms (p or p-1)
    #[arg(long, global = true)]
    pub q: Option<usize>,
    /// Real part of mu = i*lambda
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub mu_re: Option<f64>,
    /// Imaginary part of mu
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub mu_im: Option<f64>,
    /// Level of the product rule on K/M used for averages over k
    #[arg(long, global = true)]
    pub quad_level: Option<usize>,
    #[arg(long, global = true)]
    pub t_min: Option<f64>,
    #[arg(long, global = true)]
    pub t_max: Option<f64>,
    /// Number of points of the t grid (endpoints included)
    #[arg(long, global = true)]
    pub t_steps: Option<usize>,
    /// Comma-separated exponents r
    #[arg(long = "r", global = true, value_delimiter = ',')]
    pub r_values: Option<Vec<f64>>,
    /// Number of random forms or evaluation points
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file (stdout when absent)
    #[arg(long = "out", global = true)]
    pub out_path: Option<String>,
}

impl RunConfig {
    /// Defaults shared by every subcommand; `t` grid and sample count vary.
    pub fn defaults(t: (f64, f64, usize), samples: usize) -> Self {
        Self {
            n: 4,
            p: 1,
            q: 1,
            mu_re: 1.5,
            mu_im: 0.0,
            quad_level: 3,
            t_min: t.0,
            t_max: t.1,
            t_steps: t.2,
            r_values: vec![1.5, 2.0, 4.0],
            samples,
            seed: 7,
            out_path: None,
        }
    }

    /// Defaults, then the JSON file, then command-line flags.
    pub fn resolve(mut self, args: &ConfigArgs) -> Result<Self, String> {
        if let Some(path) = &args.config {
            let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            let file: FileConfig = serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))?;
            macro_rules! take {
                ($($f:ident),*) => { $( if let Some(v) = file.$f { self.$f = v; } )* };
            }
            take!(n, p, q, mu_re, mu_im, quad_level, t_min, t_max, t_steps, r_values, samples, seed);
            if file.out_path.is_some() {
                self.out_path = file.out_path;
            }
        }
        macro_rules! flag {
            ($($f:ident),*) => { $( if let Some(v) = &args.$f { self.$f = v.clone(); } )* };
        }
        flag!(n, p, q, mu_re, mu_im, quad_level, t_min, t_max, t_steps, r_values, samples, seed);
        if args.out_path.is_some() {
            self.out_path = args.out_path.clone();
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), String> {
        self.params().map_err(|e| e.to_string())?;
        if !(self.t_min >= 0.0) || !self.t_max.is_finite() || self.t_max < self.t_min {
            return Err(format!("need 0 <= t_min <= t_max, got [{}, {}]", self.t_min, self.t_max));
        }
        if self.t_steps == 0 {
            return Err("t_steps must be at least 1".into());
        }
        if self.quad_level == 0 {
            return Err("quad_level must be at least 1".into());
        }
        if self.samples == 0 {
            return Err("samples must be at least 1".into());
        }
        if let Some(r) = self.r_values.iter().find(|r| !(**r > 1.0) || !r.is_finite()) {
            return Err(format!("exponents must satisfy 1 < r < inf, got {r}"));
        }
        Ok(())
    }

    pub fn mu(&self) -> Complex64 {
        Complex64::new(self.mu_re, self.mu_im)
    }

    pub fn params(&self) -> hypoisson_core::Result<SpectralParams> {
        SpectralParams::new(self.n, self.p, self.q, self.mu())
    }

    pub fn t_grid(&self) -> Vec<f64> {
        if self.t_steps == 1 {
            return vec![self.t_max];
        }
        let h = (self.t_max - self.t_min) / (self.t_steps - 1) as f64;
        (0..self.t_steps).map(|i| self.t_min + h * i as f64).collect()
    }
}
