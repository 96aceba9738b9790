//! Numerical tolerances shared by every stage.

/// All tolerances in one record. Lengths are in chart units.
#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances {
    /// `|H|` below this is treated as a normal singularity.
    pub tol_h: f64,
    /// Residual accepted for located singularities.
    pub tol_sing: f64,
    /// Residual of the rotated `d` coefficient.
    pub tol_rot: f64,
    /// Transversality threshold, relative to the coefficient magnitude.
    pub tol_transv: f64,
    /// Roots closer than this are merged.
    pub tol_merge: f64,
    /// `|X|` accepted at a fiber equilibrium.
    pub tol_eq: f64,
    /// Eigenvalues with `|Re|` below this are non-hyperbolic.
    pub tol_eig: f64,
    /// Closure gap of a cycle, relative to its length.
    pub tol_cycle: f64,
    /// `|ln π′(0)|` above this marks a hyperbolic cycle.
    pub tol_hyp: f64,
    pub rk_atol: f64,
    pub rk_rtol: f64,
    /// Step budget per traced leaf.
    pub max_steps: usize,
    /// Arc-length budget per traced leaf, in multiples of the domain diameter.
    pub max_length_factor: f64,
    /// Gauss–Legendre nodes along a cycle.
    pub n_quad: usize,
    /// Offset of separatrix germs from their equilibrium.
    pub separatrix_offset: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol_h: 1e-8,
            tol_sing: 1e-8,
            tol_rot: 1e-10,
            tol_transv: 1e-8,
            tol_merge: 1e-6,
            tol_eq: 1e-8,
            tol_eig: 1e-6,
            tol_cycle: 1e-8,
            tol_hyp: 1e-4,
            rk_atol: 1e-10,
            rk_rtol: 1e-8,
            max_steps: 1_000_000,
            max_length_factor: 50.0,
            n_quad: 256,
            separatrix_offset: 1e-4,
        }
    }
}

impl Tolerances {
    /// Radius around a singularity inside which leaves are handed to the
    /// Lie-Cartan picture.
    pub fn r_exit(&self) -> f64 {
        10.0 * self.tol_sing.sqrt()
    }

    /// All fields as `(name, value)` pairs, in declaration order.
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("tol_h", self.tol_h),
            ("tol_sing", self.tol_sing),
            ("tol_rot", self.tol_rot),
            ("tol_transv", self.tol_transv),
            ("tol_merge", self.tol_merge),
            ("tol_eq", self.tol_eq),
            ("tol_eig", self.tol_eig),
            ("tol_cycle", self.tol_cycle),
            ("tol_hyp", self.tol_hyp),
            ("rk_atol", self.rk_atol),
            ("rk_rtol", self.rk_rtol),
            ("max_steps", self.max_steps as f64),
            ("max_length_factor", self.max_length_factor),
            ("n_quad", self.n_quad as f64),
            ("separatrix_offset", self.separatrix_offset),
        ]
    }

    /// Overrides one field by name. Values must be positive.
    pub fn set(&mut self, key: &str, value: f64) -> Result<(), String> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(format!("tolerance `{key}` must be positive, got {value}"));
        }
        match key {
            "tol_h" => self.tol_h = value,
            "tol_sing" => self.tol_sing = value,
            "tol_rot" => self.tol_rot = value,
            "tol_transv" => self.tol_transv = value,
            "tol_merge" => self.tol_merge = value,
            "tol_eq" => self.tol_eq = value,
            "tol_eig" => self.tol_eig = value,
            "tol_cycle" => self.tol_cycle = value,
            "tol_hyp" => self.tol_hyp = value,
            "rk_atol" => self.rk_atol = value,
            "rk_rtol" => self.rk_rtol = value,
            "max_steps" => self.max_steps = value as usize,
            "max_length_factor" => self.max_length_factor = value,
            "n_quad" => self.n_quad = value as usize,
            "separatrix_offset" => self.separatrix_offset = value,
            _ => return Err(format!("unknown tolerance `{key}`")),
        }
        Ok(())
    }
}
