//! Node label encodings.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Integer class labels plus class bookkeeping; the one-hot matrix is
/// materialized on demand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelEncoding {
    classes: Vec<usize>,
    num_classes: usize,
    class_sizes: Vec<usize>,
}

impl LabelEncoding {
    /// Number of classes inferred as `max(label) + 1`.
    pub fn from_classes(classes: Vec<usize>) -> Result<Self> {
        let num_classes = classes.iter().copied().max().map_or(0, |m| m + 1);
        Self::with_num_classes(classes, num_classes)
    }

    pub fn with_num_classes(classes: Vec<usize>, num_classes: usize) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::EmptyMask);
        }
        let mut class_sizes = vec![0usize; num_classes];
        for &c in &classes {
            if c >= num_classes {
                return Err(Error::InvalidParameter {
                    name: "classes",
                    reason: format!("label {c} exceeds num_classes {num_classes}"),
                });
            }
            class_sizes[c] += 1;
        }
        Ok(LabelEncoding {
            classes,
            num_classes,
            class_sizes,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.classes.len()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    #[inline]
    pub fn class_of(&self, v: usize) -> usize {
        self.classes[v]
    }

    pub fn classes(&self) -> &[usize] {
        &self.classes
    }

    pub fn class_sizes(&self) -> &[usize] {
        &self.class_sizes
    }

    /// N x C one-hot matrix Z.
    pub fn one_hot(&self) -> Tensor {
        let mut z = Tensor::zeros(self.classes.len(), self.num_classes);
        for (v, &c) in self.classes.iter().enumerate() {
            z.set(v, c, 1.0);
        }
        z
    }

    /// Metric operations need at least two classes, each nonempty.
    pub fn require_metric_ready(&self) -> Result<()> {
        if self.num_classes < 2 {
            return Err(Error::SingleClass);
        }
        if let Some(c) = self.class_sizes.iter().position(|&s| s == 0) {
            return Err(Error::EmptyClass(c));
        }
        Ok(())
    }

    /// Restrict to a node subset, dropping empty classes and remapping the
    /// surviving class ids to a dense 0..C' range. Returns the restricted
    /// encoding plus the old-class -> new-class map.
    pub fn restricted(&self, nodes: &[usize]) -> Result<(LabelEncoding, Vec<Option<usize>>)> {
        if nodes.is_empty() {
            return Err(Error::EmptyMask);
        }
        let mut present = vec![false; self.num_classes];
        for &v in nodes {
            present[self.classes[v]] = true;
        }
        let mut remap = vec![None; self.num_classes];
        let mut next = 0usize;
        for (c, &p) in present.iter().enumerate() {
            if p {
                remap[c] = Some(next);
                next += 1;
            }
        }
        let classes = nodes
            .iter()
            .map(|&v| remap[self.classes[v]].expect("present class"))
            .collect();
        let enc = LabelEncoding::with_num_classes(classes, next)?;
        Ok((enc, remap))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_hot_rows_sum_to_one_and_sizes_sum_to_n() {
        let z = LabelEncoding::from_classes(vec![0, 1, 1, 2, 0]).unwrap();
        assert_eq!(z.num_classes(), 3);
        assert_eq!(z.class_sizes(), &[2, 2, 1]);
        assert_eq!(z.class_sizes().iter().sum::<usize>(), z.num_nodes());
        let oh = z.one_hot();
        for i in 0..z.num_nodes() {
            assert_eq!(oh.row(i).iter().sum::<f64>(), 1.0);
        }
    }

    #[test]
    fn metric_ready_checks() {
        let single = LabelEncoding::from_classes(vec![0, 0, 0]).unwrap();
        assert!(matches!(
            single.require_metric_ready(),
            Err(Error::SingleClass)
        ));
        let gap = LabelEncoding::with_num_classes(vec![0, 2], 3).unwrap();
        assert!(matches!(gap.require_metric_ready(), Err(Error::EmptyClass(1))));
    }

    #[test]
    fn restriction_remaps_classes_densely() {
        let z = LabelEncoding::from_classes(vec![0, 1, 2, 2, 1]).unwrap();
        let (sub, remap) = z.restricted(&[2, 3, 4]).unwrap();
        assert_eq!(sub.num_classes(), 2);
        assert_eq!(sub.classes(), &[1, 1, 0]);
        assert_eq!(remap, vec![None, Some(0), Some(1)]);
    }
}
