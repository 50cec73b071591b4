//! Krippendorff's alpha for nominal labels.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use super::StatsError;
use crate::scalar::Scalar;

/// Annotator × item label matrix; `None` marks a missing label.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AnnotationMatrix {
    pub annotators: Vec<String>,
    pub items: Vec<String>,
    /// `labels[annotator][item]`
    pub labels: Vec<Vec<Option<String>>>,
}

/// Reads `item_id,annotator_id,label` rows (with header) into a matrix;
/// absent pairs stay missing. Rows and columns are sorted by id.
pub fn read_annotations_csv<R: Read>(r: R) -> Result<AnnotationMatrix, csv::Error> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let mut cells: BTreeMap<(String, String), String> = BTreeMap::new();
    let mut annotators = BTreeSet::new();
    let mut items = BTreeSet::new();
    for row in rdr.deserialize::<(String, String, String)>() {
        let (item, annotator, label) = row?;
        items.insert(item.clone());
        annotators.insert(annotator.clone());
        cells.insert((annotator, item), label);
    }
    let annotators: Vec<String> = annotators.into_iter().collect();
    let items: Vec<String> = items.into_iter().collect();
    let labels = annotators
        .iter()
        .map(|a| items.iter().map(|i| cells.get(&(a.clone(), i.clone())).cloned()).collect())
        .collect();
    Ok(AnnotationMatrix { annotators, items, labels })
}

/// Nominal Krippendorff's alpha from the coincidence matrix. Items with
/// fewer than two labels are not pairable and are ignored. Perfect
/// agreement yields 1 even when only one category occurs.
pub fn krippendorff_alpha<T: Scalar, L: Ord + Clone>(labels: &[Vec<Option<L>>]) -> Result<T, StatsError> {
    if labels.len() < 2 {
        return Err(StatsError::TooFew { need: 2, got: labels.len() });
    }
    let n_items = labels.iter().map(Vec::len).max().unwrap_or(0);
    let mut coincidence: BTreeMap<(L, L), T> = BTreeMap::new();
    for item in 0..n_items {
        let values: Vec<&L> = labels.iter().filter_map(|row| row.get(item).and_then(Option::as_ref)).collect();
        let mu = values.len();
        if mu < 2 {
            continue;
        }
        let w = T::one() / T::of_usize(mu - 1);
        for (i, a) in values.iter().enumerate() {
            for (j, b) in values.iter().enumerate() {
                if i != j {
                    *coincidence.entry(((*a).clone(), (*b).clone())).or_insert(T::zero()) += w;
                }
            }
        }
    }
    if coincidence.is_empty() {
        return Err(StatsError::NoPairableItems);
    }
    let mut marginals: BTreeMap<&L, T> = BTreeMap::new();
    for ((c, _), &o) in &coincidence {
        *marginals.entry(c).or_insert(T::zero()) += o;
    }
    let n: T = marginals.values().copied().sum();
    let observed: T = coincidence.iter().filter(|((c, k), _)| c != k).map(|(_, &o)| o).sum();
    if observed == T::zero() {
        return Ok(T::one());
    }
    let nc: Vec<T> = marginals.values().copied().collect();
    let mut expected = T::zero();
    for (i, &a) in nc.iter().enumerate() {
        for (j, &b) in nc.iter().enumerate() {
            if i != j {
                expected += a * b;
            }
        }
    }
    Ok(T::one() - (n - T::one()) * observed / expected)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[&[Option<&str>]]) -> Vec<Vec<Option<String>>> {
        rows.iter().map(|r| r.iter().map(|v| v.map(str::to_string)).collect()).collect()
    }

    #[test]
    fn perfect_agreement() {
        let m = matrix(&[&[Some("a"), Some("b"), Some("a")], &[Some("a"), Some("b"), Some("a")]]);
        assert_eq!(krippendorff_alpha::<f64, _>(&m).unwrap(), 1.0);
        let single = matrix(&[&[Some("a"), Some("a")], &[Some("a"), None]]);
        assert_eq!(krippendorff_alpha::<f64, _>(&single).unwrap(), 1.0);
    }

    #[test]
    fn four_item_hand_calculation() {
        // Items (A,A), (A,B), (B,B), (B,A). By hand: each item contributes one
        // ordered pair each way, so o_AA = o_BB = o_AB = o_BA = 2, n_A = n_B = 4,
        // n = 8. alpha = 1 - (n - 1) * (o_AB + o_BA) / (n_A n_B + n_B n_A)
        //             = 1 - 7 * 4 / 32 = 0.125.
        let m = matrix(&[
            &[Some("A"), Some("A"), Some("B"), Some("B")],
            &[Some("A"), Some("B"), Some("B"), Some("A")],
        ]);
        assert!((krippendorff_alpha::<f64, _>(&m).unwrap() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn missing_data_reference() {
        // Krippendorff's worked nominal example (4 coders, 12 units, missing
        // values); published alpha = 0.743.
        let m = matrix(&[
            &[Some("1"), Some("2"), Some("3"), Some("3"), Some("2"), Some("1"), Some("4"), Some("1"), Some("2"), None, None, None],
            &[Some("1"), Some("2"), Some("3"), Some("3"), Some("2"), Some("2"), Some("4"), Some("1"), Some("2"), Some("5"), None, Some("3")],
            &[None, Some("3"), Some("3"), Some("3"), Some("2"), Some("3"), Some("4"), Some("2"), Some("2"), Some("5"), Some("1"), None],
            &[Some("1"), Some("2"), Some("3"), Some("3"), Some("2"), Some("4"), Some("4"), Some("1"), Some("2"), Some("5"), Some("1"), None],
        ]);
        let a: f64 = krippendorff_alpha(&m).unwrap();
        assert!((a - 0.743).abs() < 5e-4, "{a}");
    }

    #[test]
    fn errors() {
        let one = matrix(&[&[Some("a")]]);
        assert!(matches!(krippendorff_alpha::<f64, _>(&one), Err(StatsError::TooFew { .. })));
        let unpaired = matrix(&[&[Some("a"), None], &[None, Some("b")]]);
        assert_eq!(krippendorff_alpha::<f64, _>(&unpaired), Err(StatsError::NoPairableItems));
    }

    #[test]
    fn csv_loader() {
        let text = "item_id,annotator_id,label\ni1,ann1,A\ni1,ann2,A\ni2,ann1,A\ni2,ann2,B\ni3,ann2,B\n";
        let m = read_annotations_csv(text.as_bytes()).unwrap();
        assert_eq!(m.annotators, vec!["ann1", "ann2"]);
        assert_eq!(m.labels[0][2], None);
        let a: f64 = krippendorff_alpha(&m.labels).unwrap();
        assert!(a < 1.0);
    }
}
