use serde::Serialize;

use num_traits::{Signed, Zero};

use super::{in_span, LieAlgebra, LieError};
use crate::exprcore::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum BianchiType {
    I,
    II,
    III,
    /// Solvable with two-dimensional derived algebra.
    Other(String),
    VIII,
    IX,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BianchiLabel {
    pub bianchi: BianchiType,
    pub iso: String,
    /// `(e1, e2, z)` with `[e1, e2] = e2` and `z` central, type III only.
    #[serde(serialize_with = "ser_witness")]
    pub witness: Option<[Vec<Rational>; 3]>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub dim: usize,
    pub semisimple: bool,
    pub solvable: bool,
    pub solvable_cartan: bool,
    pub solvable_derived: bool,
    pub nilpotent: bool,
    pub derived_series: Vec<usize>,
    pub lower_central_series: Vec<usize>,
    #[serde(serialize_with = "ser_vectors")]
    pub center: Vec<Vec<Rational>>,
    #[serde(serialize_with = "ser_vectors")]
    pub nilradical: Vec<Vec<Rational>>,
    #[serde(serialize_with = "ser_vectors")]
    pub killing_form: Vec<Vec<Rational>>,
    pub bianchi: Option<BianchiLabel>,
}

fn strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(|r| r.to_string()).collect()
}

fn ser_vectors<S: serde::Serializer>(v: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| strings(x)))
}

fn ser_witness<S: serde::Serializer>(
    w: &Option<[Vec<Rational>; 3]>,
    s: S,
) -> Result<S::Ok, S::Error> {
    match w {
        Some(w) => s.collect_seq(w.iter().map(|x| strings(x))),
        None => s.serialize_none(),
    }
}

pub fn classify(l: &LieAlgebra) -> Result<ClassificationReport, LieError> {
    let (cartan, derived) = l.solvability_witnesses();
    if cartan != derived {
        return Err(LieError::InternalInconsistency);
    }
    let nilradical = if l.dim() <= 4 { l.nilradical()? } else { vec![] };
    Ok(ClassificationReport {
        dim: l.dim(),
        semisimple: l.is_semisimple(),
        solvable: cartan,
        solvable_cartan: cartan,
        solvable_derived: derived,
        nilpotent: l.is_nilpotent(),
        derived_series: l.derived_series(),
        lower_central_series: l.lower_central_series(),
        center: l.center(),
        nilradical,
        killing_form: l.killing_form().to_rows(),
        bianchi: if l.dim() == 3 { Some(bianchi(l)) } else { None },
    })
}

fn label(t: BianchiType, iso: &str) -> BianchiLabel {
    BianchiLabel { bianchi: t, iso: iso.into(), witness: None }
}

fn bianchi(l: &LieAlgebra) -> BianchiLabel {
    let dg = l.derived_algebra();
    let unimodular = (0..3).all(|i| l.ad_basis(i).trace().is_zero());
    match dg.len() {
        0 => label(BianchiType::I, "R^3"),
        1 => {
            let e2 = dg[0].clone();
            let center = l.center();
            if in_span(&center, &e2) {
                return label(BianchiType::II, "Heisenberg");
            }
            let mut out = label(BianchiType::III, "aff(1) ⊕ R");
            out.witness = type_three_witness(l, &e2, &center);
            out
        }
        2 if unimodular => label(BianchiType::Other("VI0/VII0".into()), "unimodular solvable"),
        2 => label(BianchiType::Other("IV/V/VI_h/VII_h".into()), "non-unimodular solvable"),
        _ => {
            let k = l.killing_form();
            let m1 = -k[(0, 0)].clone();
            let m2 = k[(0, 0)].clone() * &k[(1, 1)] - k[(0, 1)].clone() * &k[(1, 0)];
            let m3 = -k.determinant();
            if m1.is_positive() && m2.is_positive() && m3.is_positive() {
                label(BianchiType::IX, "so(3)")
            } else {
                label(BianchiType::VIII, "sl(2, R)")
            }
        }
    }
}

fn type_three_witness(
    l: &LieAlgebra,
    e2: &[Rational],
    center: &[Vec<Rational>],
) -> Option<[Vec<Rational>; 3]> {
    let z = center.first()?.clone();
    for x in l.full_basis() {
        let b = l.bracket(&x, e2);
        let k = e2.iter().position(|c| !c.is_zero())?;
        let alpha = &b[k] / &e2[k];
        let proportional = b.iter().zip(e2).all(|(u, v)| *u == &alpha * v);
        if proportional && !alpha.is_zero() {
            let e1: Vec<Rational> = x.iter().map(|c| c / &alpha).collect();
            debug_assert_eq!(l.bracket(&e1, e2), e2);
            return Some([e1, e2.to_vec(), z]);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::super::tests::{heisenberg, sl2};
    use super::super::*;
    use super::*;
    use crate::exprcore::rat;

    #[test]
    fn paper_algebra_is_type_three() {
        let l = structure_constants(&paper_generators(), &[]).unwrap();
        let r = classify(&l).unwrap();
        assert!(r.solvable && !r.nilpotent && !r.semisimple);
        assert_eq!(r.lower_central_series, vec![3, 1]);
        let b = r.bianchi.unwrap();
        assert_eq!(b.bianchi, BianchiType::III);
        let [e1, e2, z] = b.witness.unwrap();
        assert_eq!(e1, vec![rat(1), rat(0), rat(0)]);
        assert_eq!(e2, vec![rat(0), rat(0), rat(1)]);
        assert_eq!(z, vec![rat(1), rat(1), rat(0)]);
    }

    #[test]
    fn controls() {
        assert_eq!(classify(&heisenberg()).unwrap().bianchi.unwrap().bianchi, BianchiType::II);
        assert_eq!(classify(&sl2()).unwrap().bianchi.unwrap().bianchi, BianchiType::VIII);
        let zero = LieAlgebra::from_brackets(&["a", "b", "c"], &[]).unwrap();
        assert_eq!(classify(&zero).unwrap().bianchi.unwrap().bianchi, BianchiType::I);
        let v = |xs: [i64; 3]| xs.iter().map(|&x| rat(x)).collect::<Vec<_>>();
        let so3 = LieAlgebra::from_brackets(
            &["a", "b", "c"],
            &[(0, 1, v([0, 0, 1])), (1, 2, v([1, 0, 0])), (2, 0, v([0, 1, 0]))],
        )
        .unwrap();
        assert_eq!(classify(&so3).unwrap().bianchi.unwrap().bianchi, BianchiType::IX);
        let e2 = LieAlgebra::from_brackets(
            &["a", "b", "c"],
            &[(0, 1, v([0, 0, 1])), (0, 2, v([0, -1, 0]))],
        )
        .unwrap();
        let r = classify(&e2).unwrap();
        assert!(matches!(r.bianchi.unwrap().bianchi, BianchiType::Other(s) if s == "VI0/VII0"));
    }
}
