//! JSON documents read and written by the CLI.
//!
//! A tuple document stores `n` matrices of size `dim x dim`, each row-major
//! with entries as `[re, im]` pairs. Serialization goes through serde_json's
//! shortest round-trip float formatting, so `parse(serialize(X))` is
//! bit-exact.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use ncball::fock::Word;
use ncball::freeholo::FreePolyMap;
use ncball::{ComplexMatrix, OperatorTuple};

use crate::error::CliError;

type Rows = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TupleDocument {
    pub n: usize,
    pub dim: usize,
    pub matrices: Vec<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct MapTerm {
    /// 1-based output component.
    pub component: usize,
    pub word: Vec<usize>,
    pub coeff: Rows,
}

#[derive(Clone, Debug, Deserialize)]
pub struct MapDocument {
    pub n_in: usize,
    pub q_out: usize,
    pub e: usize,
    pub terms: Vec<MapTerm>,
}

fn entry([re, im]: [f64; 2]) -> Complex64 {
    Complex64::new(re, im)
}

fn matrix(rows: &Rows, size: usize, what: &str) -> Result<ComplexMatrix, CliError> {
    if rows.len() != size || rows.iter().any(|r| r.len() != size) {
        return Err(CliError::Malformed(format!("{what} must be {size} x {size}")));
    }
    let flat: Vec<Complex64> = rows.iter().flatten().map(|&z| entry(z)).collect();
    if flat.iter().any(|z| !z.is_finite()) {
        return Err(CliError::Malformed(format!("{what} has non-finite entries")));
    }
    Ok(ComplexMatrix::from_row_major(size, size, &flat)?)
}

fn rows_of(m: &ComplexMatrix) -> Rows {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| [m.get(i, j).re, m.get(i, j).im]).collect()).collect()
}

impl TupleDocument {
    pub fn from_tuple(x: &OperatorTuple, label: Option<String>) -> Self {
        TupleDocument { n: x.n(), dim: x.d(), matrices: x.mats().iter().map(rows_of).collect(), label }
    }

    pub fn to_tuple(&self) -> Result<OperatorTuple, CliError> {
        if self.n == 0 || self.dim == 0 {
            return Err(CliError::Malformed("n and dim must be positive".into()));
        }
        if self.matrices.len() != self.n {
            return Err(CliError::Malformed(format!("expected {} matrices, found {}", self.n, self.matrices.len())));
        }
        let mats = self
            .matrices
            .iter()
            .enumerate()
            .map(|(i, rows)| matrix(rows, self.dim, &format!("matrix {}", i + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(OperatorTuple::new(mats)?)
    }

    /// `λ` either as a scalar tuple (`dim = 1`) or as a single `1 x n` row.
    pub fn to_lambda(&self) -> Result<Vec<Complex64>, CliError> {
        let values: Vec<Complex64> = match self.matrices.as_slice() {
            [only] if self.n == 1 && only.len() == 1 => only[0].iter().map(|&z| entry(z)).collect(),
            mats if self.dim == 1 && mats.len() == self.n => {
                self.to_tuple()?.as_scalar().ok_or_else(|| CliError::Malformed("lambda must be scalar".into()))?
            }
            _ => return Err(CliError::Malformed("lambda must be a 1 x n row or a scalar tuple".into())),
        };
        if values.is_empty() || values.iter().any(|z| !z.is_finite()) {
            return Err(CliError::Malformed("lambda must be a nonempty finite row".into()));
        }
        Ok(values)
    }

    /// The single matrix of an `n = 1` document.
    pub fn to_matrix(&self) -> Result<ComplexMatrix, CliError> {
        if self.n != 1 {
            return Err(CliError::Malformed(format!("expected one matrix, found n = {}", self.n)));
        }
        Ok(self.to_tuple()?.get(0).clone())
    }
}

impl MapDocument {
    pub fn to_map(&self) -> Result<FreePolyMap, CliError> {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let component = t
                    .component
                    .checked_sub(1)
                    .ok_or_else(|| CliError::Malformed("map components are 1-based".into()))?;
                Ok((component, Word::new(t.word.clone()), matrix(&t.coeff, self.e, "map coefficient")?))
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(FreePolyMap::new(self.n_in, self.q_out, self.e, terms)?)
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.to_owned(), source })
}

pub fn read_tuple(path: &Path) -> Result<OperatorTuple, CliError> {
    read_json::<TupleDocument>(path)?.to_tuple()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ncball::tuples::random_tuple;
    use proptest::prelude::*;

    fn roundtrip(x: &OperatorTuple) -> OperatorTuple {
        let text = serde_json::to_string(&TupleDocument::from_tuple(x, Some("x".into()))).unwrap();
        serde_json::from_str::<TupleDocument>(&text).unwrap().to_tuple().unwrap()
    }

    #[test]
    fn parses_example_document() {
        let doc: TupleDocument =
            serde_json::from_str(r#"{"n":2,"dim":1,"matrices":[[[[0.6,0.0]]],[[[0.0,-0.25]]]]}"#).unwrap();
        let x = doc.to_tuple().unwrap();
        assert_eq!(x.as_scalar().unwrap(), vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, -0.25)]);
        assert_eq!(doc.label, None);
    }

    #[test]
    fn rejects_bad_shapes() {
        let doc: TupleDocument = serde_json::from_str(r#"{"n":1,"dim":2,"matrices":[[[[1,0]]]]}"#).unwrap();
        assert!(matches!(doc.to_tuple(), Err(CliError::Malformed(_))));
        let doc: TupleDocument = serde_json::from_str(r#"{"n":2,"dim":1,"matrices":[[[[1,0]]]]}"#).unwrap();
        assert!(matches!(doc.to_tuple(), Err(CliError::Malformed(_))));
    }

    #[test]
    fn lambda_forms_agree() {
        let row: TupleDocument = serde_json::from_str(r#"{"n":1,"dim":2,"matrices":[[[[0.1,0],[0,0.2]]]]}"#).unwrap();
        let scalars: TupleDocument =
            serde_json::from_str(r#"{"n":2,"dim":1,"matrices":[[[[0.1,0]]],[[[0,0.2]]]]}"#).unwrap();
        assert_eq!(row.to_lambda().unwrap(), scalars.to_lambda().unwrap());
    }

    #[test]
    fn map_components_are_one_based() {
        let doc: MapDocument = serde_json::from_str(
            r#"{"n_in":2,"q_out":1,"e":1,"terms":[{"component":1,"word":[1,2],"coeff":[[[0.5,0]]]}]}"#,
        )
        .unwrap();
        let f = doc.to_map().unwrap();
        assert_eq!(f.degree(), 2);
        let bad: MapDocument =
            serde_json::from_str(r#"{"n_in":1,"q_out":1,"e":1,"terms":[{"component":0,"word":[],"coeff":[[[1,0]]]}]}"#)
                .unwrap();
        assert!(matches!(bad.to_map(), Err(CliError::Malformed(_))));
    }

    #[test]
    fn awkward_floats_roundtrip() {
        let vals = [0.1, -0.0, 1e-300, 5e-324, 0.1 + 0.2, std::f64::consts::PI / 7.0];
        let x = OperatorTuple::scalar(&vals.iter().map(|&v| Complex64::new(v, -v)).collect::<Vec<_>>());
        assert!(roundtrip(&x).bit_eq(&x));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn tuple_roundtrip_is_bit_exact(seed in any::<u64>(), n in 1usize..4, d in 1usize..4, t in 0.01f64..0.99) {
            let x = random_tuple(n, d, t, seed).unwrap();
            prop_assert!(roundtrip(&x).bit_eq(&x));
        }
    }
}
