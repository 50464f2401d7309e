//! Flag and config-file handling. The config file is flat `key = value`
//! text with the same keys as the long flags; command-line flags override
//! file entries. All numbers are parsed as exact rationals.

use std::collections::BTreeMap;
use std::path::PathBuf;

use qdad::precision::{crat, rat_from_str, rat_i64, CRat, Mode, PrecisionCtx, Rat};
use qdad::scenario::ScenarioParams;
use num_traits::Zero;

use crate::CliError;

#[derive(clap::Args, Clone, Debug, Default)]
pub struct CommonArgs {
    /// Flat `key = value` config file; flags given here override its entries
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Spin order K (repeatable for `moments`)
    #[arg(long = "K", value_name = "INT")]
    pub k: Vec<u32>,

    /// Real part of the shift alpha, decimal or p/q (repeatable for `dad`)
    #[arg(long, value_name = "NUM", allow_hyphen_values = true)]
    pub alpha_re: Vec<String>,

    /// Imaginary part of the shift alpha (pairs with --alpha-re, default 0)
    #[arg(long, value_name = "NUM", allow_hyphen_values = true)]
    pub alpha_im: Vec<String>,

    /// Real part of the normalized shift alpha / (K dx); alternative to --alpha-re
    #[arg(long, value_name = "NUM", allow_hyphen_values = true)]
    pub alpha_tilde: Vec<String>,

    /// Imaginary part of the normalized shift (pairs with --alpha-tilde)
    #[arg(long, value_name = "NUM", allow_hyphen_values = true)]
    pub alpha_tilde_im: Vec<String>,

    /// Node spacing dx; defaults to omega_L d / p0^2 when the scenario trio
    /// is given, else 1
    #[arg(long, value_name = "NUM")]
    pub delta_x: Option<String>,

    /// Envelope width sigma; defaults to 2 K dx
    #[arg(long, value_name = "NUM")]
    pub sigma: Option<String>,

    /// Larmor frequency; with --d and --p0 this fixes dx and the phase angle
    #[arg(long = "omega-L", value_name = "NUM")]
    pub omega_l: Option<String>,

    /// Field-region width
    #[arg(long, value_name = "NUM")]
    pub d: Option<String>,

    /// Mean momentum (unit particle mass)
    #[arg(long, value_name = "NUM")]
    pub p0: Option<String>,

    /// Highest moment order (moments; default 40)
    #[arg(long, value_name = "INT")]
    pub n_max: Option<u32>,

    /// Number of grid points (envelope default 2001, transmission 1001)
    #[arg(long, value_name = "INT")]
    pub grid_points: Option<usize>,

    /// Momentum grid half-range (transmission; default twice the analytic window)
    #[arg(long, value_name = "NUM")]
    pub p_max: Option<String>,

    /// Relative tolerance of the empirical window search (default 0.01)
    #[arg(long, value_name = "REAL")]
    pub tol: Option<f64>,

    /// Numeric mode: exact (default) or float
    #[arg(long, value_name = "MODE")]
    pub mode: Option<String>,

    /// Decimal digits of working precision (float mode; also raises the
    /// transcendental working precision in exact mode)
    #[arg(long, value_name = "INT")]
    pub digits: Option<u32>,

    /// Output format: csv (data file plus JSON sidecar) or json
    #[arg(long, value_name = "FMT")]
    pub format: Option<String>,

    /// Output path stem; files are written as <stem>[_tag].csv/.json
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Fully resolved run parameters, plus the echo block that goes into every
/// output header and sidecar.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub ks: Vec<u32>,
    alphas_abs: Vec<CRat>,
    alphas_tilde: Vec<CRat>,
    pub delta_x: Rat,
    sigma: Option<Rat>,
    pub scenario: Option<ScenarioParams>,
    pub n_max: u32,
    pub grid_points: Option<usize>,
    pub p_max: Option<Rat>,
    pub tol: f64,
    pub ctx: PrecisionCtx,
    pub format: Format,
    pub out: PathBuf,
}

impl CommonArgs {
    /// Fold config-file entries under the flags, then resolve everything.
    pub fn resolve(&self, command: &str) -> Result<Resolved, CliError> {
        let mut args = self.clone();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(CliError::Io)?;
            let file = parse_config_file(&text)?;
            merge_file(&mut args, &file)?;
        }
        args.resolve_merged(command)
    }

    fn resolve_merged(&self, command: &str) -> Result<Resolved, CliError> {
        if self.k.is_empty() {
            return Err(CliError::Param("--K is required".into()));
        }
        if command != "moments" && self.k.len() > 1 {
            return Err(CliError::Param(format!(
                "`{command}` takes a single --K (lists are for `moments`)"
            )));
        }

        let scenario_parts = [&self.omega_l, &self.d, &self.p0];
        let scenario = if scenario_parts.iter().all(|v| v.is_some()) {
            let omega_l = parse_num("omega-L", self.omega_l.as_deref().unwrap())?;
            let d = parse_num("d", self.d.as_deref().unwrap())?;
            let p0 = parse_num("p0", self.p0.as_deref().unwrap())?;
            Some((omega_l, d, p0))
        } else if scenario_parts.iter().any(|v| v.is_some()) {
            return Err(CliError::Param(
                "--omega-L, --d and --p0 must be given together".into(),
            ));
        } else {
            None
        };

        let delta_x = match (&self.delta_x, &scenario) {
            (Some(s), None) => parse_positive("delta-x", s)?,
            (None, Some((omega_l, d, p0))) => omega_l * d / (p0 * p0),
            (Some(s), Some((omega_l, d, p0))) => {
                let explicit = parse_positive("delta-x", s)?;
                let induced = omega_l * d / (p0 * p0);
                if explicit != induced {
                    return Err(CliError::Param(format!(
                        "--delta-x {explicit} conflicts with omega_L d / p0^2 = {induced}"
                    )));
                }
                explicit
            }
            (None, None) => rat_i64(1),
        };

        if !self.alpha_re.is_empty() && !self.alpha_tilde.is_empty() {
            return Err(CliError::Param(
                "give the shift as --alpha-re or --alpha-tilde, not both".into(),
            ));
        }
        let alphas_abs = pair_complex("alpha-re", &self.alpha_re, "alpha-im", &self.alpha_im)?;
        let alphas_tilde = pair_complex(
            "alpha-tilde",
            &self.alpha_tilde,
            "alpha-tilde-im",
            &self.alpha_tilde_im,
        )?;
        if alphas_abs.is_empty() && alphas_tilde.is_empty() {
            return Err(CliError::Param(
                "a shift is required: --alpha-re or --alpha-tilde".into(),
            ));
        }
        if command != "dad" && alphas_abs.len().max(alphas_tilde.len()) > 1 {
            return Err(CliError::Param(format!(
                "`{command}` takes a single shift (lists are for `dad`)"
            )));
        }

        let sigma = match &self.sigma {
            Some(s) => Some(parse_positive("sigma", s)?),
            None => None,
        };

        let mode = match self.mode.as_deref() {
            None | Some("exact") => Mode::Exact,
            Some("float") => Mode::Float,
            Some(other) => {
                return Err(CliError::Param(format!(
                    "unknown mode '{other}' (expected exact or float)"
                )))
            }
        };
        let ctx = match mode {
            Mode::Exact => {
                let base = PrecisionCtx::exact();
                match self.digits {
                    // exact mode with a digits override only raises the
                    // transcendental working floor; build via float ctx
                    // validation then keep exact semantics
                    Some(d) if d > PrecisionCtx::MIN_DIGITS => {
                        PrecisionCtx::float(d).map_err(CliError::from)?; // validate
                        PrecisionCtx::exact_with_floor(d)
                    }
                    _ => base,
                }
            }
            Mode::Float => PrecisionCtx::float(self.digits.unwrap_or(50)).map_err(CliError::from)?,
        };

        let format = match self.format.as_deref() {
            None | Some("csv") => Format::Csv,
            Some("json") => Format::Json,
            Some(other) => {
                return Err(CliError::Param(format!(
                    "unknown format '{other}' (expected csv or json)"
                )))
            }
        };

        let tol = self.tol.unwrap_or(0.01);
        if !(0.0 < tol && tol < 1.0) {
            return Err(CliError::Param(format!("--tol must lie in (0, 1), got {tol}")));
        }

        let p_max = match &self.p_max {
            Some(s) => Some(parse_positive("p-max", s)?),
            None => None,
        };

        let scenario = match scenario {
            Some((omega_l, d, p0)) => {
                let k0 = self.k[0];
                let sig = sigma.clone().unwrap_or_else(|| {
                    rat_i64(2) * Rat::from_integer(k0.max(1).into()) * &delta_x
                });
                Some(
                    ScenarioParams::new(omega_l, d, p0, k0, sig)
                        .map_err(CliError::from)?,
                )
            }
            None => None,
        };

        Ok(Resolved {
            ks: self.k.clone(),
            alphas_abs,
            alphas_tilde,
            delta_x,
            sigma,
            scenario,
            n_max: self.n_max.unwrap_or(40),
            grid_points: self.grid_points,
            p_max,
            tol,
            ctx,
            format,
            out: self.out.clone().unwrap_or_else(|| PathBuf::from(command)),
        })
    }
}

impl Resolved {
    pub fn single_k(&self) -> u32 {
        self.ks[0]
    }

    /// Shift list for a given order: absolute shifts as given, or the
    /// normalized ones scaled by K dx.
    pub fn alphas_for_k(&self, k: u32) -> Vec<CRat> {
        if !self.alphas_abs.is_empty() {
            self.alphas_abs.clone()
        } else {
            let scale = Rat::from_integer(k.into()) * &self.delta_x;
            self.alphas_tilde
                .iter()
                .map(|t| crat(&t.re * &scale, &t.im * &scale))
                .collect()
        }
    }

    pub fn sigma_for_k(&self, k: u32) -> Rat {
        self.sigma
            .clone()
            .unwrap_or_else(|| rat_i64(2) * Rat::from_integer(k.max(1).into()) * &self.delta_x)
    }

    /// Resolved-parameter echo for file headers and sidecars.
    pub fn echo(&self, k: u32, alpha: Option<&CRat>) -> Vec<(String, String)> {
        let mut e = vec![
            ("K".to_string(), k.to_string()),
            ("delta_x".to_string(), self.delta_x.to_string()),
        ];
        if let Some(a) = alpha {
            e.push(("alpha_re".to_string(), a.re.to_string()));
            e.push(("alpha_im".to_string(), a.im.to_string()));
        }
        if let Some(sc) = &self.scenario {
            e.push(("omega_L".to_string(), sc.omega_l().to_string()));
            e.push(("d".to_string(), sc.d().to_string()));
            e.push(("p0".to_string(), sc.p0().to_string()));
        }
        e.push((
            "mode".to_string(),
            match self.ctx.mode() {
                Mode::Exact => "exact".to_string(),
                Mode::Float => "float".to_string(),
            },
        ));
        e.push(("digits".to_string(), self.ctx.digits().to_string()));
        e
    }
}

fn parse_num(name: &str, s: &str) -> Result<Rat, CliError> {
    rat_from_str(s).map_err(|_| CliError::Param(format!("--{name}: cannot parse '{s}'")))
}

fn parse_positive(name: &str, s: &str) -> Result<Rat, CliError> {
    let v = parse_num(name, s)?;
    if v <= Rat::zero() {
        return Err(CliError::Param(format!("--{name} must be positive, got {s}")));
    }
    Ok(v)
}

fn pair_complex(
    re_name: &str,
    re: &[String],
    im_name: &str,
    im: &[String],
) -> Result<Vec<CRat>, CliError> {
    if im.len() > re.len() {
        return Err(CliError::Param(format!(
            "more --{im_name} values than --{re_name}"
        )));
    }
    re.iter()
        .enumerate()
        .map(|(i, r)| {
            let re_v = parse_num(re_name, r)?;
            let im_v = match im.get(i) {
                Some(s) => parse_num(im_name, s)?,
                None => Rat::zero(),
            };
            Ok(crat(re_v, im_v))
        })
        .collect()
}

fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Param(format!("config line {}: expected key = value", lineno + 1))
        })?;
        let key = key.trim().replace('_', "-");
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn split_list(v: &str) -> Vec<String> {
    v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

fn merge_file(args: &mut CommonArgs, file: &BTreeMap<String, String>) -> Result<(), CliError> {
    for (key, value) in file {
        match key.as_str() {
            "K" | "k" => {
                if args.k.is_empty() {
                    args.k = split_list(value)
                        .iter()
                        .map(|s| {
                            s.parse::<u32>()
                                .map_err(|_| CliError::Param(format!("config K: bad integer '{s}'")))
                        })
                        .collect::<Result<_, _>>()?;
                }
            }
            "alpha-re" => fill_list(&mut args.alpha_re, value),
            "alpha-im" => fill_list(&mut args.alpha_im, value),
            "alpha-tilde" => fill_list(&mut args.alpha_tilde, value),
            "alpha-tilde-im" => fill_list(&mut args.alpha_tilde_im, value),
            "delta-x" => fill(&mut args.delta_x, value),
            "sigma" => fill(&mut args.sigma, value),
            "omega-L" | "omega-l" => fill(&mut args.omega_l, value),
            "d" => fill(&mut args.d, value),
            "p0" => fill(&mut args.p0, value),
            "n-max" => fill_parsed(&mut args.n_max, key, value)?,
            "grid-points" => fill_parsed(&mut args.grid_points, key, value)?,
            "p-max" => fill(&mut args.p_max, value),
            "tol" => fill_parsed(&mut args.tol, key, value)?,
            "mode" => fill(&mut args.mode, value),
            "digits" => fill_parsed(&mut args.digits, key, value)?,
            "format" => fill(&mut args.format, value),
            "out" => {
                if args.out.is_none() {
                    args.out = Some(PathBuf::from(value));
                }
            }
            other => {
                return Err(CliError::Param(format!("unknown config key '{other}'")));
            }
        }
    }
    Ok(())
}

fn fill(slot: &mut Option<String>, value: &str) {
    if slot.is_none() {
        *slot = Some(value.to_string());
    }
}

fn fill_list(slot: &mut Vec<String>, value: &str) {
    if slot.is_empty() {
        *slot = split_list(value);
    }
}

fn fill_parsed<T: std::str::FromStr>(slot: &mut Option<T>, key: &str, value: &str) -> Result<(), CliError> {
    if slot.is_none() {
        *slot = Some(
            value
                .parse::<T>()
                .map_err(|_| CliError::Param(format!("config {key}: cannot parse '{value}'")))?,
        );
    }
    Ok(())
}
