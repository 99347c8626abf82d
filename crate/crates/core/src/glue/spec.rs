use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GluingKind {
    Crosscap,
    Handle,
}

impl GluingKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GluingKind::Crosscap => "crosscap",
            GluingKind::Handle => "handle",
        }
    }
}

/// One surgery: a disk of radius `eps` at vertex `p` (cross-cap), or disks at `p` and
/// q = p + sqrt(eps) v (handle), joined by a neck of half-length `half_length`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct GluingSpec {
    pub kind: GluingKind,
    pub p: usize,
    /// Angle of the handle direction v in the patch frame (radians).
    pub v_angle: f64,
    pub eps: f64,
    pub half_length: f64,
    pub n: usize,
}

impl GluingSpec {
    pub fn crosscap(p: usize, eps: f64, half_length: f64, n: usize) -> Self {
        GluingSpec {
            kind: GluingKind::Crosscap,
            p,
            v_angle: 0.0,
            eps,
            half_length,
            n,
        }
    }

    pub fn handle(p: usize, v_angle: f64, eps: f64, half_length: f64, n: usize) -> Self {
        GluingSpec {
            kind: GluingKind::Handle,
            p,
            v_angle,
            eps,
            half_length,
            n,
        }
    }

    /// Hard preconditions. `patch_radius` is the flat patch radius delta0 around p.
    pub fn validate(&self, patch_radius: f64) -> Result<()> {
        if self.n % 2 == 1 || self.n < 8 {
            return Err(Error::InvalidInput(format!(
                "boundary resolution N must be even and at least 8, got {}",
                self.n
            )));
        }
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return Err(Error::InvalidInput(format!("disk radius must be positive, got {}", self.eps)));
        }
        if !(self.half_length > 0.0) || !self.half_length.is_finite() {
            return Err(Error::InvalidInput(format!(
                "neck half-length must be positive, got {}",
                self.half_length
            )));
        }
        if self.kind == GluingKind::Handle && self.eps >= 0.25 * patch_radius * patch_radius {
            return Err(Error::InvalidInput(format!(
                "handle needs eps < delta0^2/4 = {}, got {}",
                0.25 * patch_radius * patch_radius,
                self.eps
            )));
        }
        Ok(())
    }

    /// Soft conditions worth reporting but not fatal.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        let lmin = 1.5 * 2f64.ln();
        if self.half_length < lmin {
            w.push(format!(
                "neck half-length {} is below (3/2) log 2 = {lmin:.6}",
                self.half_length
            ));
        }
        w
    }

    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "kind = {}", self.kind.as_str());
        let _ = writeln!(s, "p = {}", self.p);
        let _ = writeln!(s, "v = {:?}", self.v_angle);
        let _ = writeln!(s, "eps = {:?}", self.eps);
        let _ = writeln!(s, "L = {:?}", self.half_length);
        let _ = writeln!(s, "N = {}", self.n);
        s
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        let mut kind = None;
        let mut p = None;
        let mut v = 0.0;
        let mut eps = None;
        let mut l = None;
        let mut n = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let perr = |m: String| Error::Parse { line: i + 1, message: m };
            let (key, val) = line
                .split_once('=')
                .ok_or_else(|| perr(format!("expected key = value, got '{line}'")))?;
            let (key, val) = (key.trim(), val.trim());
            let num = |val: &str| -> Result<f64> {
                val.parse::<f64>()
                    .map_err(|_| perr(format!("'{key}' needs a number, got '{val}'")))
            };
            let int = |val: &str| -> Result<usize> {
                val.parse::<usize>()
                    .map_err(|_| perr(format!("'{key}' needs a non-negative integer, got '{val}'")))
            };
            match key {
                "kind" => {
                    kind = Some(match val {
                        "crosscap" => GluingKind::Crosscap,
                        "handle" => GluingKind::Handle,
                        _ => return Err(perr(format!("unknown gluing kind '{val}'"))),
                    })
                }
                "p" => p = Some(int(val)?),
                "v" => v = num(val)?,
                "eps" => eps = Some(num(val)?),
                "L" => l = Some(num(val)?),
                "N" => n = Some(int(val)?),
                _ => return Err(perr(format!("unknown key '{key}'"))),
            }
        }
        let missing = |k: &str| Error::InvalidInput(format!("gluing spec is missing '{k}'"));
        Ok(GluingSpec {
            kind: kind.ok_or_else(|| missing("kind"))?,
            p: p.ok_or_else(|| missing("p"))?,
            v_angle: v,
            eps: eps.ok_or_else(|| missing("eps"))?,
            half_length: l.ok_or_else(|| missing("L"))?,
            n: n.ok_or_else(|| missing("N"))?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_round_trip_is_exact() {
        let s = GluingSpec::handle(3, 0.1 + 0.2, 0.0123456789, 1.5 * 2f64.ln(), 64);
        assert_eq!(GluingSpec::from_kv(&s.to_kv()).unwrap(), s);
    }

    #[test]
    fn unknown_key_reports_line() {
        let e = GluingSpec::from_kv("kind = crosscap\n\nfoo = 1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn handle_radius_bound() {
        let s = GluingSpec::handle(0, 0.0, 0.05, 2.0, 64);
        assert!(s.validate(0.4).is_err());
        assert!(GluingSpec::handle(0, 0.0, 0.03, 2.0, 64).validate(0.4).is_ok());
        assert!(GluingSpec::crosscap(0, 0.1, 2.0, 63).validate(0.4).is_err());
    }
}
