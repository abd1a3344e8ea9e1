//! Initial-state descriptors:
//!
//! ```text
//! gaussian(1.0)
//! hermite(3, 0.5)
//! 0.6*gaussian(1) + (0,0.8)*hermite(2,1) - hermite(1, 2)
//! file(path/to/state.txt)
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use fisherlab::analytic::{psi_k, AnalyticState, MAX_ORDER};
use fisherlab::grid::{Grid, Space, WaveFunction};
use fisherlab::propagator::InitialState;
use fisherlab::{next_smooth_even, Complex64};

use crate::error::{CliError, Result};

/// Relative jitter allowed in the x column of a state file.
pub const SPACING_JITTER: f64 = 1e-9;

/// Largest momentum-density mass tolerated in the outer third of a file
/// state's own momentum lattice.
pub const SMOOTHNESS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Component {
    Gaussian { delta: f64 },
    Hermite { k: usize, delta: f64 },
}

impl Component {
    pub fn k(&self) -> usize {
        match *self {
            Component::Gaussian { .. } => 0,
            Component::Hermite { k, .. } => k,
        }
    }

    pub fn delta(&self) -> f64 {
        match *self {
            Component::Gaussian { delta } | Component::Hermite { delta, .. } => delta,
        }
    }

    fn analytic(&self) -> Result<AnalyticState> {
        Ok(AnalyticState::new(self.k(), self.delta(), 0.0)?)
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Component::Gaussian { delta } => write!(f, "gaussian({delta})"),
            Component::Hermite { k, delta } => write!(f, "hermite({k},{delta})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Single(Component),
    Superposition(Vec<(Complex64, Component)>),
    File(PathBuf),
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::Single(c) => write!(f, "{c}"),
            StateSpec::File(p) => write!(f, "file({})", p.display()),
            StateSpec::Superposition(terms) => {
                for (i, (c, comp)) in terms.iter().enumerate() {
                    let negative = c.im == 0.0 && c.re.is_sign_negative();
                    match (i > 0, negative) {
                        (true, true) => f.write_str(" - ")?,
                        (true, false) => f.write_str(" + ")?,
                        (false, true) => f.write_str("-")?,
                        (false, false) => {}
                    }
                    if c.im == 0.0 {
                        write!(f, "{}*{comp}", c.re.abs())?;
                    } else {
                        write!(f, "({},{})*{comp}", c.re, c.im)?;
                    }
                }
                Ok(())
            }
        }
    }
}

impl StateSpec {
    pub fn parse(text: &str) -> Result<StateSpec> {
        let text = text.trim();
        if let Some(rest) = text.strip_prefix("file(") {
            let path = rest
                .strip_suffix(')')
                .ok_or_else(|| bad(text, "unterminated file(...)"))?
                .trim();
            if path.is_empty() {
                return Err(bad(text, "empty path"));
            }
            return Ok(StateSpec::File(PathBuf::from(path)));
        }
        let mut p = Parser { src: text, pos: 0 };
        let terms = p.terms()?;
        match terms.as_slice() {
            [(c, comp)] if *c == Complex64::new(1.0, 0.0) => Ok(StateSpec::Single(*comp)),
            _ => Ok(StateSpec::Superposition(terms)),
        }
    }

    /// `(k, delta)` when the state is a single family member.
    pub fn family_member(&self) -> Option<(usize, f64)> {
        match self {
            StateSpec::Single(c) => Some((c.k(), c.delta())),
            _ => None,
        }
    }

    fn components(&self) -> Vec<Component> {
        match self {
            StateSpec::Single(c) => vec![*c],
            StateSpec::Superposition(t) => t.iter().map(|(_, c)| *c).collect(),
            StateSpec::File(_) => vec![],
        }
    }

    /// Builds the initial state together with the lattice it is first
    /// sampled on.
    pub fn build(&self) -> Result<(InitialState, Grid)> {
        let label = self.to_string();
        if let StateSpec::File(path) = self {
            let wf = load_state(path)?;
            check_smooth(&wf)?;
            let grid = *wf.grid();
            return Ok((InitialState::sampled(label, wf), grid));
        }
        let grid = probe_grid(&self.components())?;
        let terms: Vec<(Complex64, AnalyticState)> = match self {
            StateSpec::Single(c) => vec![(Complex64::new(1.0, 0.0), c.analytic()?)],
            StateSpec::Superposition(t) => t
                .iter()
                .map(|(w, c)| Ok((*w, c.analytic()?)))
                .collect::<Result<_>>()?,
            StateSpec::File(_) => unreachable!(),
        };
        let init = InitialState::analytic(label, move |x| {
            terms.iter().map(|(w, s)| w * psi_k(s, x)).sum()
        });
        Ok((init, grid))
    }
}

fn bad(text: &str, why: &str) -> CliError {
    CliError::Usage(format!("cannot parse state `{text}`: {why}"))
}

/// Coarse lattice that still resolves every component in both spaces.
pub fn probe_grid(components: &[Component]) -> Result<Grid> {
    let mut half_width: f64 = 0.0;
    let mut p_need: f64 = 0.0;
    for c in components {
        let spread = ((2 * c.k() + 2) as f64).sqrt();
        half_width = half_width.max(12.0 * c.delta() * spread);
        p_need = p_need.max((spread + 10.0) / c.delta());
    }
    let dx = std::f64::consts::PI / p_need;
    let n = next_smooth_even(((2.0 * half_width / dx).ceil() as usize).max(64));
    Ok(Grid::new(-0.5 * n as f64 * dx, dx, n)?)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(bad(self.src, &format!("expected `{c}` at offset {}", self.pos)))
        }
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let len = self
            .rest()
            .char_indices()
            .find(|&(i, c)| {
                !(c.is_ascii_digit()
                    || c == '.'
                    || c == 'e'
                    || c == 'E'
                    || ((c == '-' || c == '+') && (i == 0 || self.rest()[..i].ends_with(['e', 'E']))))
            })
            .map_or(self.rest().len(), |(i, _)| i);
        let tok = &self.rest()[..len];
        let v: f64 = tok
            .parse()
            .map_err(|_| bad(self.src, &format!("bad number at offset {}", self.pos)))?;
        if !v.is_finite() {
            return Err(bad(self.src, "non-finite number"));
        }
        self.pos += len;
        Ok(v)
    }

    fn ident(&mut self) -> &str {
        self.skip_ws();
        let len = self
            .rest()
            .find(|c: char| !c.is_ascii_alphabetic())
            .unwrap_or(self.rest().len());
        let start = self.pos;
        self.pos += len;
        &self.src[start..self.pos]
    }

    fn component(&mut self) -> Result<Component> {
        let name = self.ident().to_ascii_lowercase();
        self.expect('(')?;
        let comp = match name.as_str() {
            "gaussian" => Component::Gaussian {
                delta: self.number()?,
            },
            "hermite" => {
                let k = self.number()?;
                if k < 0.0 || k.fract() != 0.0 || k > MAX_ORDER as f64 {
                    return Err(bad(self.src, "hermite order must be an integer in [0, 64]"));
                }
                self.expect(',')?;
                Component::Hermite {
                    k: k as usize,
                    delta: self.number()?,
                }
            }
            "" => return Err(bad(self.src, "expected a state name")),
            other => return Err(bad(self.src, &format!("unknown state `{other}`"))),
        };
        self.expect(')')?;
        if !(comp.delta() > 0.0) {
            return Err(bad(self.src, "width must be positive"));
        }
        Ok(comp)
    }

    fn coefficient(&mut self) -> Result<Option<Complex64>> {
        self.skip_ws();
        if self.rest().starts_with('(') {
            self.pos += 1;
            let re = self.number()?;
            self.expect(',')?;
            let im = self.number()?;
            self.expect(')')?;
            self.expect('*')?;
            return Ok(Some(Complex64::new(re, im)));
        }
        if self.rest().starts_with(|c: char| c.is_ascii_digit() || c == '.') {
            let re = self.number()?;
            self.expect('*')?;
            return Ok(Some(Complex64::new(re, 0.0)));
        }
        Ok(None)
    }

    fn terms(&mut self) -> Result<Vec<(Complex64, Component)>> {
        let mut out = Vec::new();
        let mut sign = if self.eat('-') { -1.0 } else { 1.0 };
        loop {
            let c = self.coefficient()?.unwrap_or(Complex64::new(1.0, 0.0));
            out.push((c * sign, self.component()?));
            if self.eat('+') {
                sign = 1.0;
            } else if self.eat('-') {
                sign = -1.0;
            } else {
                break;
            }
        }
        self.skip_ws();
        if !self.rest().is_empty() {
            return Err(bad(self.src, &format!("trailing input at offset {}", self.pos)));
        }
        if out.iter().all(|(c, _)| c.norm() == 0.0) {
            return Err(CliError::BadState("all coefficients are zero".into()));
        }
        Ok(out)
    }
}

/// Reads a three-column `x  Re(psi)  Im(psi)` file (whitespace or comma
/// separated, `#` comments) into a normalized position-space state.
pub fn load_state(path: &Path) -> Result<WaveFunction> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_state(&text).map_err(|e| match e {
        CliError::BadState(msg) => CliError::BadState(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_state(text: &str) -> Result<WaveFunction> {
    let mut xs = Vec::new();
    let mut amps = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        if cols.len() != 3 {
            return Err(CliError::BadState(format!(
                "line {}: expected 3 columns, found {}",
                i + 1,
                cols.len()
            )));
        }
        let mut v = [0.0; 3];
        for (slot, col) in v.iter_mut().zip(&cols) {
            *slot = col
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| CliError::BadState(format!("line {}: bad number `{col}`", i + 1)))?;
        }
        xs.push(v[0]);
        amps.push(Complex64::new(v[1], v[2]));
    }
    if xs.is_empty() {
        return Err(CliError::BadState("no samples".into()));
    }
    if xs.len() < fisherlab::grid::MIN_POINTS {
        return Err(CliError::BadState(format!(
            "{} samples, need at least {}",
            xs.len(),
            fisherlab::grid::MIN_POINTS
        )));
    }
    let n = xs.len();
    let dx = (xs[n - 1] - xs[0]) / (n - 1) as f64;
    if !(dx > 0.0) {
        return Err(CliError::BadState("x column must increase".into()));
    }
    for (m, w) in xs.windows(2).enumerate() {
        if ((w[1] - w[0]) - dx).abs() > SPACING_JITTER * dx {
            return Err(CliError::BadState(format!(
                "non-uniform x spacing between rows {} and {}",
                m + 1,
                m + 2
            )));
        }
    }
    let grid = Grid::new(xs[0], dx, n)?;
    let wf = WaveFunction::new(grid, amps, Space::Position)?;
    wf.normalize().map_err(|e| match e {
        fisherlab::Error::ZeroNorm => CliError::BadState("zero norm".into()),
        other => other.into(),
    })
}

/// Rejects states whose spectrum reaches the outer third of their own
/// momentum lattice, or whose samples do not decay at the window edges.
pub fn check_smooth(wf: &WaveFunction) -> Result<()> {
    let mom = wf.to_momentum()?;
    let cut = 2.0 / 3.0 * wf.grid().p_max();
    let outer: f64 = mom
        .coords()
        .iter()
        .zip(mom.density())
        .filter(|(p, _)| p.abs() > cut)
        .map(|(_, r)| r * mom.spacing())
        .sum();
    if outer > SMOOTHNESS_TOL {
        return Err(CliError::BadState(format!(
            "momentum mass {outer:.3e} above |p| = {cut:.4} exceeds {SMOOTHNESS_TOL:e}"
        )));
    }
    if wf.is_grid_too_small(fisherlab::grid::BOUNDARY_TOL) {
        return Err(CliError::BadState(format!(
            "mass {:.3e} at the window edges; the state is truncated",
            wf.boundary_mass()
        )));
    }
    Ok(())
}
