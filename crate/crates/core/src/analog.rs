//! Analog precoder structure: the binary antenna-to-phase-shifter mapping and
//! the b-bit phase grid.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use crate::error::{config, Error, Result};
use crate::linalg::{CMat, CVec, ONE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MappingKind {
    /// Each shifter drives a contiguous run of antennas.
    Adjacent,
    /// Shifter `l_c` drives antennas `l_c, l_c + L_c, ...`.
    Interleaved,
    /// One shifter per antenna (the conventional array of subarrays).
    Identity,
    /// Contiguous runs whose lengths differ by at most one; equals
    /// `Adjacent` when `L_c` divides `L`.
    Balanced,
}

impl fmt::Display for MappingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Adjacent => "adjacent",
            Self::Interleaved => "interleaved",
            Self::Identity => "identity",
            Self::Balanced => "balanced",
        })
    }
}

impl FromStr for MappingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "adjacent" => Ok(Self::Adjacent),
            "interleaved" => Ok(Self::Interleaved),
            "identity" | "aosa" => Ok(Self::Identity),
            "balanced" => Ok(Self::Balanced),
            other => config(format!("unknown mapping kind '{other}'")),
        }
    }
}

/// Binary `L x L_c` matrix with exactly one 1 per row, stored as the column
/// index of that 1 for every row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingMatrix {
    kind: MappingKind,
    shifter_of: Vec<usize>,
    shifters: usize,
}

fn check_sizes(l: usize, lc: usize, divisible: bool) -> Result<()> {
    if l == 0 || lc == 0 || lc > l {
        return config(format!("need 1 <= L_c <= L, got L = {l}, L_c = {lc}"));
    }
    if divisible && !l.is_multiple_of(lc) {
        return config(format!("L_c = {lc} does not divide L = {l}"));
    }
    Ok(())
}

pub fn make_adjacent_mapping(l: usize, lc: usize) -> Result<MappingMatrix> {
    check_sizes(l, lc, true)?;
    let run = l / lc;
    Ok(MappingMatrix {
        kind: MappingKind::Adjacent,
        shifter_of: (0..l).map(|i| i / run).collect(),
        shifters: lc,
    })
}

pub fn make_interleaved_mapping(l: usize, lc: usize) -> Result<MappingMatrix> {
    check_sizes(l, lc, true)?;
    Ok(MappingMatrix {
        kind: MappingKind::Interleaved,
        shifter_of: (0..l).map(|i| i % lc).collect(),
        shifters: lc,
    })
}

pub fn make_identity_mapping(l: usize) -> Result<MappingMatrix> {
    check_sizes(l, l, false)?;
    Ok(MappingMatrix { kind: MappingKind::Identity, shifter_of: (0..l).collect(), shifters: l })
}

/// Contiguous runs; the first `L mod L_c` shifters drive one extra antenna.
pub fn make_balanced_mapping(l: usize, lc: usize) -> Result<MappingMatrix> {
    check_sizes(l, lc, false)?;
    let (base, extra) = (l / lc, l % lc);
    let mut shifter_of = Vec::with_capacity(l);
    for s in 0..lc {
        let run = base + usize::from(s < extra);
        shifter_of.extend(std::iter::repeat_n(s, run));
    }
    Ok(MappingMatrix { kind: MappingKind::Balanced, shifter_of, shifters: lc })
}

impl MappingMatrix {
    pub fn new(kind: MappingKind, l: usize, lc: usize) -> Result<Self> {
        match kind {
            MappingKind::Adjacent => make_adjacent_mapping(l, lc),
            MappingKind::Interleaved => make_interleaved_mapping(l, lc),
            MappingKind::Balanced => make_balanced_mapping(l, lc),
            MappingKind::Identity => {
                if lc != l {
                    return config(format!("identity mapping needs L_c = L, got {lc} != {l}"));
                }
                make_identity_mapping(l)
            }
        }
    }

    pub fn kind(&self) -> MappingKind {
        self.kind
    }

    /// Antennas per subarray `L`.
    pub fn antennas(&self) -> usize {
        self.shifter_of.len()
    }

    /// Phase shifters per RF chain `L_c`.
    pub fn shifters(&self) -> usize {
        self.shifters
    }

    /// Column holding the single 1 of row `l`.
    pub fn shifter_of(&self, l: usize) -> usize {
        self.shifter_of[l]
    }

    pub fn entry(&self, l: usize, lc: usize) -> f64 {
        if self.shifter_of[l] == lc {
            1.0
        } else {
            0.0
        }
    }

    pub fn to_matrix(&self) -> CMat {
        let mut m = CMat::zeros(self.antennas(), self.shifters);
        for (l, &s) in self.shifter_of.iter().enumerate() {
            m[(l, s)] = ONE;
        }
        m
    }

    /// `A z_{n_c}` for one RF chain.
    pub fn apply(&self, z: &[num_complex::Complex64]) -> CVec {
        assert_eq!(z.len(), self.shifters);
        CVec::from_iterator(self.antennas(), self.shifter_of.iter().map(|&s| z[s]))
    }
}

/// Reduces an angle into `[0, 2π)`.
pub fn wrap_phase(alpha: f64) -> f64 {
    let w = alpha.rem_euclid(TAU);
    // rem_euclid can return TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// The set `{ν·2π/2^b : ν = 0..2^b-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseGrid {
    bits: u32,
}

impl PhaseGrid {
    pub fn new(bits: u32) -> Result<Self> {
        if !(1..=24).contains(&bits) {
            return config(format!("phase resolution must be 1..=24 bits, got {bits}"));
        }
        Ok(Self { bits })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn levels(&self) -> usize {
        1usize << self.bits
    }

    pub fn step(&self) -> f64 {
        TAU / self.levels() as f64
    }

    pub fn level(&self, index: usize) -> f64 {
        index as f64 * self.step()
    }

    /// Index of the nearest grid point; index `2^b` wraps to 0 and ties
    /// go to the lower index.
    pub fn nearest_index(&self, alpha: f64) -> usize {
        let a = wrap_phase(alpha);
        let step = self.step();
        let lo = ((a / step).floor() as usize).min(self.levels() - 1);
        let hi = lo + 1;
        let nu = if hi as f64 * step - a < a - lo as f64 * step { hi } else { lo };
        if nu == self.levels() {
            0
        } else {
            nu
        }
    }

    /// `⌊alpha⌉_b`.
    pub fn quantize(&self, alpha: f64) -> f64 {
        self.level(self.nearest_index(alpha))
    }

    pub fn contains(&self, theta: f64) -> bool {
        let idx = theta / self.step();
        (0.0..TAU).contains(&theta) && (idx - idx.round()).abs() < 1e-9
    }
}

/// Nearest b-bit grid phase to `alpha`.
///
/// Panics if `bits` is outside `1..=24`; use [`PhaseGrid`] for a fallible
/// constructor.
pub fn quantize_phase(alpha: f64, bits: u32) -> f64 {
    PhaseGrid::new(bits).expect("invalid phase resolution").quantize(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn adjacent_eight_by_four() {
        let a = make_adjacent_mapping(8, 4).unwrap();
        for l in 0..8 {
            for lc in 0..4 {
                assert_eq!(a.entry(l, lc), if l / 2 == lc { 1.0 } else { 0.0 });
            }
        }
        let small = make_adjacent_mapping(4, 2).unwrap();
        assert_eq!(small.shifter_of, vec![0, 0, 1, 1]);
    }

    #[test]
    fn interleaved_stacks_identities() {
        let a = make_interleaved_mapping(8, 4).unwrap();
        assert_eq!(a.shifter_of, vec![0, 1, 2, 3, 0, 1, 2, 3]);
        let b = make_interleaved_mapping(6, 3).unwrap();
        assert_eq!(b.shifter_of, vec![0, 1, 2, 0, 1, 2]);
    }

    #[test]
    fn full_size_is_identity() {
        for make in [make_adjacent_mapping, make_interleaved_mapping, make_balanced_mapping] {
            let m = make(5, 5).unwrap();
            assert_eq!(m.to_matrix(), CMat::identity(5, 5));
        }
    }

    #[test]
    fn non_divisible_rejected() {
        assert!(make_adjacent_mapping(18, 10).is_err());
        assert!(make_interleaved_mapping(18, 4).is_err());
        assert!(make_adjacent_mapping(4, 0).is_err());
        assert!(make_adjacent_mapping(4, 8).is_err());
    }

    #[test]
    fn balanced_runs() {
        let m = make_balanced_mapping(18, 10).unwrap();
        let mut counts = vec![0; 10];
        for l in 0..18 {
            counts[m.shifter_of(l)] += 1;
        }
        assert_eq!(counts, vec![2, 2, 2, 2, 2, 2, 2, 2, 1, 1]);
        assert_eq!(make_balanced_mapping(8, 4).unwrap().shifter_of, make_adjacent_mapping(8, 4).unwrap().shifter_of);
    }

    #[test]
    fn quantize_examples() {
        for b in 1..6 {
            assert_eq!(quantize_phase(0.0, b), 0.0);
        }
        assert_eq!(quantize_phase(TAU - 0.1, 3), 0.0);
        assert!((quantize_phase(0.4, 3) - PI / 4.0).abs() < 1e-15);
        assert_eq!(quantize_phase(-0.05, 2), 0.0);
        assert!((quantize_phase(PI + 0.1, 1) - PI).abs() < 1e-15);
    }

    #[test]
    fn grid_membership() {
        let g = PhaseGrid::new(3).unwrap();
        assert!(g.contains(g.level(5)));
        assert!(!g.contains(0.3));
        assert!(PhaseGrid::new(0).is_err());
    }
}
