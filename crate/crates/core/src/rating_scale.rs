//! Ordered credit-grade alphabet and the class-index mapping used as model
//! targets.
//!
//! The scale orders grade symbols best-first, so a smaller index means
//! stronger credit. Training targets never use scale positions directly:
//! only a handful of grades are observed in any real panel, so
//! [`ClassIndexMap`] compacts the observed grades into sequential integers
//! `0..C-1` while preserving scale order. A higher class index is always
//! worse credit, which makes "souring" an increasing score.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The default 21-grade letter scale, best first. The standard S&P symbol
/// set has 22 entries; standalone "C" is dropped to land on 21. Any other
/// alphabet can be supplied through [`RatingScale::new`].
pub const DEFAULT_GRADES: [&str; 21] = [
    "AAA", "AA+", "AA", "AA-", "A+", "A", "A-", "BBB+", "BBB", "BBB-", "BB+", "BB", "BB-", "B+",
    "B", "B-", "CCC+", "CCC", "CCC-", "CC", "D",
];

/// Ordered grade alphabet, index 0 = best credit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingScale {
    grades: Vec<String>,
}

impl RatingScale {
    /// Build a scale from an ordered symbol list. Symbols must be unique and
    /// non-empty.
    pub fn new<S: Into<String>>(grades: impl IntoIterator<Item = S>) -> Result<Self> {
        let grades: Vec<String> = grades.into_iter().map(Into::into).collect();
        if grades.is_empty() {
            return Err(Error::InvalidScale("scale has no grades".into()));
        }
        for (i, g) in grades.iter().enumerate() {
            if g.is_empty() {
                return Err(Error::InvalidScale(format!("grade at position {i} is empty")));
            }
            if grades[..i].contains(g) {
                return Err(Error::InvalidScale(format!("duplicate grade '{g}'")));
            }
        }
        Ok(Self { grades })
    }

    /// The 21-grade default scale.
    pub fn default_scale() -> Self {
        Self::new(DEFAULT_GRADES).expect("default scale is valid")
    }

    pub fn len(&self) -> usize {
        self.grades.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grades.is_empty()
    }

    pub fn grades(&self) -> &[String] {
        &self.grades
    }

    /// Position of `text` in the scale; smaller is better credit.
    pub fn parse_grade(&self, text: &str) -> Result<usize> {
        self.grades
            .iter()
            .position(|g| g == text)
            .ok_or_else(|| Error::UnknownGrade(text.to_string()))
    }

    /// Symbol at a scale position.
    pub fn grade(&self, index: usize) -> Option<&str> {
        self.grades.get(index).map(String::as_str)
    }
}

impl Default for RatingScale {
    fn default() -> Self {
        Self::default_scale()
    }
}

/// One observed grade with its position in the global scale.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassEntry {
    pub grade: String,
    pub scale_index: usize,
}

/// Mapping from observed grades to sequential class indices `0..C-1`,
/// ordered by scale position (class 0 = best observed grade).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassIndexMap {
    entries: Vec<ClassEntry>,
}

impl ClassIndexMap {
    /// Build the map from a label collection. Duplicates collapse; the
    /// distinct grades are ordered by scale position and numbered from 0.
    pub fn build<S: AsRef<str>>(
        labels: impl IntoIterator<Item = S>,
        scale: &RatingScale,
    ) -> Result<Self> {
        let mut scale_indices: Vec<usize> = Vec::new();
        for label in labels {
            let idx = scale.parse_grade(label.as_ref())?;
            if !scale_indices.contains(&idx) {
                scale_indices.push(idx);
            }
        }
        if scale_indices.is_empty() {
            return Err(Error::EmptyLabels);
        }
        scale_indices.sort_unstable();
        let entries = scale_indices
            .into_iter()
            .map(|scale_index| ClassEntry {
                grade: scale.grade(scale_index).expect("parsed index").to_string(),
                scale_index,
            })
            .collect();
        Ok(Self { entries })
    }

    /// Map with no classes. Only produced for empty datasets.
    pub(crate) fn empty() -> Self {
        Self { entries: Vec::new() }
    }

    /// Number of observed classes C.
    pub fn num_classes(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Class index of a grade, if the grade was observed.
    pub fn class_of(&self, grade: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.grade == grade)
    }

    /// Grade symbol of a class index.
    pub fn grade_of(&self, class: usize) -> Option<&str> {
        self.entries.get(class).map(|e| e.grade.as_str())
    }

    pub fn entries(&self) -> &[ClassEntry] {
        &self.entries
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_scale_has_21_grades_best_first() {
        let scale = RatingScale::default_scale();
        assert_eq!(scale.len(), 21);
        assert_eq!(scale.parse_grade("AAA").unwrap(), 0);
        assert_eq!(scale.parse_grade("D").unwrap(), 20);
    }

    #[test]
    fn unknown_grade_is_rejected_by_name() {
        let scale = RatingScale::default_scale();
        let err = scale.parse_grade("ZZ").unwrap_err();
        assert!(err.to_string().contains("ZZ"), "{err}");
    }

    #[test]
    fn scale_rejects_duplicates_and_empties() {
        assert!(RatingScale::new(["A", "A"]).is_err());
        assert!(RatingScale::new(["A", ""]).is_err());
        assert!(RatingScale::new(Vec::<String>::new()).is_err());
    }

    #[test]
    fn class_map_orders_observed_grades() {
        let scale = RatingScale::default_scale();
        let map =
            ClassIndexMap::build(["A+", "A-", "BB+", "B-", "CCC+", "D"], &scale).unwrap();
        assert_eq!(map.num_classes(), 6);
        for (i, g) in ["A+", "A-", "BB+", "B-", "CCC+", "D"].iter().enumerate() {
            assert_eq!(map.class_of(g), Some(i));
            assert_eq!(map.grade_of(i), Some(*g));
        }
    }

    #[test]
    fn class_map_single_class() {
        let scale = RatingScale::default_scale();
        let map = ClassIndexMap::build(["BB+"], &scale).unwrap();
        assert_eq!(map.num_classes(), 1);
        assert_eq!(map.class_of("BB+"), Some(0));
    }

    #[test]
    fn class_map_collapses_duplicates_and_restores_scale_order() {
        let scale = RatingScale::default_scale();
        let map = ClassIndexMap::build(["D", "A+", "D", "BB+"], &scale).unwrap();
        assert_eq!(map.num_classes(), 3);
        assert_eq!(map.class_of("A+"), Some(0));
        assert_eq!(map.class_of("BB+"), Some(1));
        assert_eq!(map.class_of("D"), Some(2));
    }

    #[test]
    fn class_map_rejects_empty_and_unknown() {
        let scale = RatingScale::default_scale();
        assert!(matches!(
            ClassIndexMap::build(Vec::<String>::new(), &scale),
            Err(Error::EmptyLabels)
        ));
        assert!(ClassIndexMap::build(["A+", "??"], &scale).is_err());
    }

    #[test]
    fn roundtrip_grade_index() {
        let scale = RatingScale::default_scale();
        for i in 0..scale.len() {
            let g = scale.grade(i).unwrap();
            assert_eq!(scale.parse_grade(g).unwrap(), i);
        }
    }
}
