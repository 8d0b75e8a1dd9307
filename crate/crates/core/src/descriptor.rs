//! Function descriptor files.
//!
//! A descriptor is a small JSON document that carries a function
//! representation bit-exactly: explicit tables and cores as hex strings
//! (entry `i` at byte `i/8`, bit `i%8` — the crate-wide low-bit-first
//! layout), positions as 0-based variable indices, and an optional planted
//! relabeling. Round-tripping a descriptor through disk reproduces the same
//! document byte for byte, which the harness relies on when replaying runs.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::boolfn::{FunctionView, Isomorphism, JuntaCore, PsfCore, TruthTable};
use crate::error::{Error, Result};

pub const DESCRIPTOR_SCHEMA: &str = "locorr-fn-v1";

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DescriptorKind {
    Table,
    Junta,
    Psf,
}

/// On-disk form of a function, possibly with a relabeling attached.
///
/// `sigma`, when present, denotes the function `base.apply_isomorphism(sigma)`;
/// [`Descriptor::to_view`] applies it, [`Descriptor::base_view`] does not.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct Descriptor {
    pub schema: String,
    pub kind: DescriptorKind,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Table bits: the full table for `kind = table`, the core for the rest.
    pub table_hex: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<usize>>,
}

impl Descriptor {
    /// Describe `view`, optionally recording `sigma` alongside it.
    pub fn from_view(view: &FunctionView, sigma: Option<&Isomorphism>) -> Descriptor {
        let sigma = sigma.map(|s| s.as_slice().to_vec());
        match view {
            FunctionView::Table(t) => Descriptor {
                schema: DESCRIPTOR_SCHEMA.into(),
                kind: DescriptorKind::Table,
                n: t.n(),
                k: None,
                m: None,
                table_hex: t.to_hex(),
                positions: None,
                sigma,
            },
            FunctionView::Junta { n, core, positions } => Descriptor {
                schema: DESCRIPTOR_SCHEMA.into(),
                kind: DescriptorKind::Junta,
                n: *n,
                k: Some(core.k()),
                m: None,
                table_hex: core.table().to_hex(),
                positions: Some(positions.clone()),
                sigma,
            },
            FunctionView::Psf { n, core, positions } => Descriptor {
                schema: DESCRIPTOR_SCHEMA.into(),
                kind: DescriptorKind::Psf,
                n: *n,
                k: Some(core.k()),
                m: Some(core.m()),
                table_hex: core.to_hex(),
                positions: Some(positions.clone()),
                sigma,
            },
        }
    }

    /// The function without the recorded relabeling.
    pub fn base_view(&self) -> Result<FunctionView> {
        if self.schema != DESCRIPTOR_SCHEMA {
            return Err(Error::Descriptor(format!(
                "unknown schema '{}'",
                self.schema
            )));
        }
        let need = |field: &Option<Vec<usize>>, name: &str| -> Result<Vec<usize>> {
            field
                .clone()
                .ok_or_else(|| Error::Descriptor(format!("missing field '{name}'")))
        };
        match self.kind {
            DescriptorKind::Table => Ok(FunctionView::table(TruthTable::from_hex(
                self.n,
                &self.table_hex,
            )?)),
            DescriptorKind::Junta => {
                let k = self
                    .k
                    .ok_or_else(|| Error::Descriptor("missing field 'k'".into()))?;
                let core = JuntaCore::new(TruthTable::from_hex(k, &self.table_hex)?);
                FunctionView::junta(self.n, core, need(&self.positions, "positions")?)
            }
            DescriptorKind::Psf => {
                let k = self
                    .k
                    .ok_or_else(|| Error::Descriptor("missing field 'k'".into()))?;
                let m = self
                    .m
                    .ok_or_else(|| Error::Descriptor("missing field 'm'".into()))?;
                let core = PsfCore::from_hex(k, m, &self.table_hex)?;
                FunctionView::psf(self.n, core, need(&self.positions, "positions")?)
            }
        }
    }

    pub fn sigma(&self) -> Result<Option<Isomorphism>> {
        self.sigma
            .clone()
            .map(Isomorphism::new)
            .transpose()
            .map_err(|_| Error::Descriptor(format!("sigma is not a permutation of 0..{}", self.n)))
    }

    /// The described function with `sigma` (if any) applied.
    pub fn to_view(&self) -> Result<FunctionView> {
        let base = self.base_view()?;
        match self.sigma()? {
            Some(sigma) => base.apply_isomorphism(&sigma),
            None => Ok(base),
        }
    }
}

pub fn write_descriptor(path: impl AsRef<Path>, d: &Descriptor) -> Result<()> {
    let mut text = serde_json::to_string_pretty(d)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_descriptor(path: impl AsRef<Path>) -> Result<Descriptor> {
    let text = fs::read_to_string(path)?;
    let d: Descriptor = serde_json::from_str(&text)
        .map_err(|e| Error::Descriptor(format!("not a descriptor: {e}")))?;
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitVector;
    use crate::boolfn::{distance_exact_counts, DistanceMode};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn round_trip(d: &Descriptor) -> Descriptor {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.json");
        write_descriptor(&path, d).unwrap();
        let first = fs::read(&path).unwrap();
        let back = read_descriptor(&path).unwrap();
        write_descriptor(&path, &back).unwrap();
        let second = fs::read(&path).unwrap();
        assert_eq!(first, second, "descriptor files must be byte-identical");
        back
    }

    #[test]
    fn table_descriptor_round_trips_bit_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let t = TruthTable::random(9, &mut rng).unwrap();
        let view = FunctionView::table(t);
        let d = Descriptor::from_view(&view, None);
        let back = round_trip(&d);
        assert_eq!(back, d);
        let (diff, _) = distance_exact_counts(&back.to_view().unwrap(), &view).unwrap();
        assert_eq!(diff, 0);
    }

    #[test]
    fn junta_descriptor_keeps_structure_and_sigma() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let core = JuntaCore::random(3, &mut rng).unwrap();
        let view = FunctionView::junta(12, core, vec![7, 0, 11]).unwrap();
        let sigma = Isomorphism::random(12, &mut rng);
        let d = Descriptor::from_view(&view, Some(&sigma));
        let back = round_trip(&d);
        assert_eq!(back, d);
        // to_view applies sigma, base_view does not.
        let applied = view.apply_isomorphism(&sigma).unwrap();
        let (diff, _) = distance_exact_counts(&back.to_view().unwrap(), &applied).unwrap();
        assert_eq!(diff, 0);
        let (diff_base, _) = distance_exact_counts(&back.base_view().unwrap(), &view).unwrap();
        assert_eq!(diff_base, 0);
    }

    #[test]
    fn psf_descriptor_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let core = PsfCore::random(2, 8, &mut rng).unwrap();
        let view = FunctionView::psf(10, core, vec![3, 9]).unwrap();
        let d = Descriptor::from_view(&view, None);
        let back = round_trip(&d);
        let g = back.to_view().unwrap();
        let mut rng2 = ChaCha8Rng::seed_from_u64(48);
        for _ in 0..200 {
            let x = BitVector::random(10, &mut rng2);
            assert_eq!(g.eval(&x), view.eval(&x));
        }
        assert_eq!(
            crate::boolfn::distance(&g, &view, DistanceMode::Exact).unwrap(),
            0.0
        );
    }

    #[test]
    fn malformed_descriptors_are_rejected() {
        let mut d = Descriptor {
            schema: DESCRIPTOR_SCHEMA.into(),
            kind: DescriptorKind::Junta,
            n: 6,
            k: Some(2),
            m: None,
            table_hex: "0f".into(),
            positions: Some(vec![1, 1]), // repeated position
            sigma: None,
        };
        assert!(d.base_view().is_err());
        d.positions = Some(vec![1, 2]);
        assert!(d.base_view().is_ok());
        d.sigma = Some(vec![0, 0, 1, 2, 3, 4]); // not a permutation
        assert!(d.to_view().is_err());
        d.schema = "something-else".into();
        assert!(d.base_view().is_err());
    }
}
