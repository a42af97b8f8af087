//! Loading financial-statement feature rows and rating labels from
//! delimited files, joining them, and applying the completeness filter.
//!
//! File formats are header-driven: the manifest, not column position,
//! defines feature order, so source exports can shuffle columns freely.
//! A cell is missing when it is empty or does not parse as a number
//! ("NA", "-", ...); missing is never coerced to zero, because the
//! completeness filter has to distinguish absent from zero.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rating_scale::{ClassIndexMap, RatingScale};

/// Key columns every feature and label file must carry.
pub const COMPANY_COLUMN: &str = "company_id";
pub const YEAR_COLUMN: &str = "fiscal_year";
/// Label column in the label file.
pub const RATING_COLUMN: &str = "rating";

/// Which financial statement a feature comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatementGroup {
    Income,
    Balance,
    Cashflow,
}

impl StatementGroup {
    pub fn parse(text: &str) -> Result<Self> {
        match text.trim().to_ascii_lowercase().as_str() {
            "income" => Ok(Self::Income),
            "balance" => Ok(Self::Balance),
            "cashflow" => Ok(Self::Cashflow),
            other => Err(Error::InvalidConfig(format!(
                "unknown statement group '{other}' (expected income, balance, or cashflow)"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Income => "income",
            Self::Balance => "balance",
            Self::Cashflow => "cashflow",
        }
    }
}

/// One feature field: name plus its statement group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub group: StatementGroup,
}

/// Default 43-field manifest: common fields forming a coherent set of
/// financials across the three statements. A stand-in field list; any
/// other list can be loaded from a manifest file, and all downstream
/// logic is manifest-driven.
const DEFAULT_FIELDS: [(&str, StatementGroup); 43] = [
    ("TotalRevenue", StatementGroup::Income),
    ("CostOfRevenue", StatementGroup::Income),
    ("GrossProfit", StatementGroup::Income),
    ("SellingGeneralAdmin", StatementGroup::Income),
    ("ResearchDevelopment", StatementGroup::Income),
    ("OperatingExpenses", StatementGroup::Income),
    ("OperatingIncome", StatementGroup::Income),
    ("InterestExpense", StatementGroup::Income),
    ("PretaxIncome", StatementGroup::Income),
    ("IncomeTaxExpense", StatementGroup::Income),
    ("NetIncome", StatementGroup::Income),
    ("Ebit", StatementGroup::Income),
    ("Ebitda", StatementGroup::Income),
    ("BasicEps", StatementGroup::Income),
    ("DilutedEps", StatementGroup::Income),
    ("CashAndEquivalents", StatementGroup::Balance),
    ("ShortTermInvestments", StatementGroup::Balance),
    ("AccountsReceivable", StatementGroup::Balance),
    ("Inventory", StatementGroup::Balance),
    ("TotalCurrentAssets", StatementGroup::Balance),
    ("NetPpe", StatementGroup::Balance),
    ("Goodwill", StatementGroup::Balance),
    ("IntangibleAssets", StatementGroup::Balance),
    ("TotalAssets", StatementGroup::Balance),
    ("AccountsPayable", StatementGroup::Balance),
    ("ShortTermDebt", StatementGroup::Balance),
    ("TotalCurrentLiabilities", StatementGroup::Balance),
    ("LongTermDebt", StatementGroup::Balance),
    ("TotalLiabilities", StatementGroup::Balance),
    ("RetainedEarnings", StatementGroup::Balance),
    ("TotalStockholdersEquity", StatementGroup::Balance),
    ("WorkingCapital", StatementGroup::Balance),
    ("OperatingCashFlow", StatementGroup::Cashflow),
    ("DepreciationAmortization", StatementGroup::Cashflow),
    ("StockBasedCompensation", StatementGroup::Cashflow),
    ("ChangeInWorkingCapital", StatementGroup::Cashflow),
    ("CapitalExpenditure", StatementGroup::Cashflow),
    ("InvestingCashFlow", StatementGroup::Cashflow),
    ("FinancingCashFlow", StatementGroup::Cashflow),
    ("DebtIssuance", StatementGroup::Cashflow),
    ("DebtRepayment", StatementGroup::Cashflow),
    ("DividendsPaid", StatementGroup::Cashflow),
    ("FreeCashFlow", StatementGroup::Cashflow),
];

/// Ordered feature-field list. Feature vectors everywhere in the crate are
/// indexed by manifest position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureManifest {
    entries: Vec<ManifestEntry>,
}

impl FeatureManifest {
    pub fn new(entries: Vec<ManifestEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidConfig("manifest has no fields".into()));
        }
        for (i, e) in entries.iter().enumerate() {
            if e.name.is_empty() {
                return Err(Error::InvalidConfig(format!(
                    "manifest field at position {i} has an empty name"
                )));
            }
            if entries[..i].iter().any(|p| p.name == e.name) {
                return Err(Error::InvalidConfig(format!(
                    "duplicate manifest field '{}'",
                    e.name
                )));
            }
        }
        Ok(Self { entries })
    }

    /// The built-in 43-field manifest.
    pub fn default_manifest() -> Self {
        let entries = DEFAULT_FIELDS
            .iter()
            .map(|(name, group)| ManifestEntry {
                name: (*name).to_string(),
                group: *group,
            })
            .collect();
        Self::new(entries).expect("default manifest is valid")
    }

    /// Load from a delimited file with header `field,statement`.
    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let headers = reader.headers()?.clone();
        let field_idx = headers
            .iter()
            .position(|h| h.trim() == "field")
            .ok_or_else(|| missing_columns(path, vec!["field".into()]))?;
        let group_idx = headers
            .iter()
            .position(|h| h.trim() == "statement")
            .ok_or_else(|| missing_columns(path, vec!["statement".into()]))?;
        let mut entries = Vec::new();
        for row in reader.records() {
            let row = row?;
            let name = row.get(field_idx).unwrap_or("").trim().to_string();
            let group = StatementGroup::parse(row.get(group_idx).unwrap_or(""))?;
            entries.push(ManifestEntry { name, group });
        }
        Self::new(entries)
    }

    /// Write as `field,statement` rows.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "field,statement")?;
        for e in &self.entries {
            writeln!(out, "{},{}", e.name, e.group.as_str())?;
        }
        out.flush()?;
        Ok(())
    }

    /// Number of feature fields F.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[ManifestEntry] {
        &self.entries
    }

    pub fn field_names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.name.as_str())
    }
}

impl Default for FeatureManifest {
    fn default() -> Self {
        Self::default_manifest()
    }
}

/// One company-fiscal-year row: F raw feature values (each possibly
/// missing) plus an optional grade label.
#[derive(Debug, Clone, PartialEq)]
pub struct CompanyYearRecord {
    pub company_id: String,
    pub fiscal_year: i32,
    pub values: Vec<Option<f64>>,
    pub label: Option<String>,
}

impl CompanyYearRecord {
    pub fn is_complete(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }
}

/// Inclusive fiscal-year range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearRange {
    pub start: i32,
    pub end: i32,
}

impl YearRange {
    pub fn new(start: i32, end: i32) -> Result<Self> {
        if end < start {
            return Err(Error::InvalidConfig(format!(
                "year range {start}..{end} is empty"
            )));
        }
        Ok(Self { start, end })
    }

    /// Smallest range covering all record years, if any records exist.
    pub fn covering(records: &[CompanyYearRecord]) -> Option<Self> {
        let min = records.iter().map(|r| r.fiscal_year).min()?;
        let max = records.iter().map(|r| r.fiscal_year).max()?;
        Some(Self { start: min, end: max })
    }

    pub fn contains(&self, year: i32) -> bool {
        (self.start..=self.end).contains(&year)
    }

    pub fn years(&self) -> impl Iterator<Item = i32> {
        self.start..=self.end
    }

    /// Number of years in the range.
    pub fn len(&self) -> usize {
        (self.end - self.start + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Complete, fully labeled sample collection with its manifest and class
/// map. Every record has all F values present and a label that is in the
/// class map.
#[derive(Debug, Clone)]
pub struct Dataset {
    records: Vec<CompanyYearRecord>,
    pub manifest: FeatureManifest,
    pub class_map: ClassIndexMap,
}

impl Dataset {
    pub fn new(
        records: Vec<CompanyYearRecord>,
        manifest: FeatureManifest,
        class_map: ClassIndexMap,
    ) -> Result<Self> {
        for r in &records {
            if r.values.len() != manifest.len() {
                return Err(Error::DimensionMismatch {
                    expected: manifest.len(),
                    actual: r.values.len(),
                });
            }
            if !r.is_complete() {
                return Err(Error::IncompleteRecord {
                    company_id: r.company_id.clone(),
                    fiscal_year: r.fiscal_year,
                });
            }
            match &r.label {
                None => {
                    return Err(Error::UnlabeledRecord {
                        company_id: r.company_id.clone(),
                        fiscal_year: r.fiscal_year,
                    })
                }
                Some(label) if class_map.class_of(label).is_none() => {
                    return Err(Error::UnknownGrade(label.clone()));
                }
                Some(_) => {}
            }
        }
        Ok(Self {
            records,
            manifest,
            class_map,
        })
    }

    /// Sample count m.
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[CompanyYearRecord] {
        &self.records
    }

    /// Number of distinct companies.
    pub fn num_companies(&self) -> usize {
        let mut seen: Vec<&str> = Vec::new();
        for r in &self.records {
            if !seen.contains(&r.company_id.as_str()) {
                seen.push(&r.company_id);
            }
        }
        seen.len()
    }

    /// Raw samples-by-features matrix in record order.
    pub fn design_matrix(&self) -> Array2<f64> {
        let f = self.manifest.len();
        let mut matrix = Array2::zeros((self.records.len(), f));
        for (i, r) in self.records.iter().enumerate() {
            for (j, v) in r.values.iter().enumerate() {
                matrix[[i, j]] = v.expect("dataset records are complete");
            }
        }
        matrix
    }

    /// Class index per record, in record order.
    pub fn class_indices(&self) -> Vec<usize> {
        self.records
            .iter()
            .map(|r| {
                let label = r.label.as_deref().expect("dataset records are labeled");
                self.class_map
                    .class_of(label)
                    .expect("dataset labels are in the class map")
            })
            .collect()
    }

    /// Sub-dataset at the given record indices (indices must be valid).
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let records = indices.iter().map(|&i| self.records[i].clone()).collect();
        Dataset {
            records,
            manifest: self.manifest.clone(),
            class_map: self.class_map.clone(),
        }
    }

    /// Per-class sample counts, indexed by class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.class_map.num_classes()];
        for c in self.class_indices() {
            counts[c] += 1;
        }
        counts
    }
}

fn missing_columns(path: &Path, missing: Vec<String>) -> Error {
    Error::MissingColumns {
        path: path.display().to_string(),
        missing,
    }
}

fn malformed(path: &Path, row: u64, message: impl Into<String>) -> Error {
    Error::MalformedRow {
        path: path.display().to_string(),
        row,
        message: message.into(),
    }
}

fn row_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

/// Load feature rows. The header must name `company_id`, `fiscal_year`,
/// and every manifest field; extra columns are ignored. Unparseable or
/// absent feature cells become missing markers, never zero.
pub fn load_financials(path: &Path, manifest: &FeatureManifest) -> Result<Vec<CompanyYearRecord>> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let position_of = |name: &str| headers.iter().position(|h| h.trim() == name);

    let mut missing: Vec<String> = Vec::new();
    let company_idx = position_of(COMPANY_COLUMN);
    let year_idx = position_of(YEAR_COLUMN);
    if company_idx.is_none() {
        missing.push(COMPANY_COLUMN.into());
    }
    if year_idx.is_none() {
        missing.push(YEAR_COLUMN.into());
    }
    let mut field_idx = Vec::with_capacity(manifest.len());
    for name in manifest.field_names() {
        match position_of(name) {
            Some(i) => field_idx.push(i),
            None => missing.push(name.to_string()),
        }
    }
    if !missing.is_empty() {
        return Err(missing_columns(path, missing));
    }
    let (company_idx, year_idx) = (company_idx.unwrap(), year_idx.unwrap());

    let mut records = Vec::new();
    let mut seen: BTreeMap<(String, i32), ()> = BTreeMap::new();
    for row in reader.records() {
        let row = row?;
        let line = row_line(&row);
        let company_id = row
            .get(company_idx)
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .ok_or_else(|| malformed(path, line, "empty company_id"))?
            .to_string();
        let year_text = row.get(year_idx).map(str::trim).unwrap_or("");
        let fiscal_year: i32 = year_text
            .parse()
            .map_err(|_| malformed(path, line, format!("bad fiscal_year '{year_text}'")))?;
        if seen.insert((company_id.clone(), fiscal_year), ()).is_some() {
            return Err(Error::DuplicateRecord {
                company_id,
                fiscal_year,
            });
        }
        let values = field_idx
            .iter()
            .map(|&i| row.get(i).and_then(|cell| cell.trim().parse::<f64>().ok()))
            .collect();
        records.push(CompanyYearRecord {
            company_id,
            fiscal_year,
            values,
            label: None,
        });
    }
    Ok(records)
}

/// Join rating labels onto records by `(company_id, fiscal_year)`.
/// Outer join: records without a label row keep their label absent; label
/// rows without a matching record are ignored.
pub fn join_labels(
    mut records: Vec<CompanyYearRecord>,
    labels_path: &Path,
    scale: &RatingScale,
) -> Result<Vec<CompanyYearRecord>> {
    let mut reader = csv::Reader::from_path(labels_path)?;
    let headers = reader.headers()?.clone();
    let position_of = |name: &str| headers.iter().position(|h| h.trim() == name);

    let mut missing = Vec::new();
    let company_idx = position_of(COMPANY_COLUMN);
    let year_idx = position_of(YEAR_COLUMN);
    let rating_idx = position_of(RATING_COLUMN);
    for (idx, name) in [
        (company_idx, COMPANY_COLUMN),
        (year_idx, YEAR_COLUMN),
        (rating_idx, RATING_COLUMN),
    ] {
        if idx.is_none() {
            missing.push(name.into());
        }
    }
    if !missing.is_empty() {
        return Err(missing_columns(labels_path, missing));
    }
    let (company_idx, year_idx, rating_idx) =
        (company_idx.unwrap(), year_idx.unwrap(), rating_idx.unwrap());

    let mut labels: BTreeMap<(String, i32), String> = BTreeMap::new();
    for row in reader.records() {
        let row = row?;
        let line = row_line(&row);
        let company_id = row.get(company_idx).map(str::trim).unwrap_or("").to_string();
        let year_text = row.get(year_idx).map(str::trim).unwrap_or("");
        let fiscal_year: i32 = year_text
            .parse()
            .map_err(|_| malformed(labels_path, line, format!("bad fiscal_year '{year_text}'")))?;
        let grade = row.get(rating_idx).map(str::trim).unwrap_or("").to_string();
        scale.parse_grade(&grade)?;
        if labels.insert((company_id.clone(), fiscal_year), grade).is_some() {
            return Err(Error::DuplicateLabel {
                company_id,
                fiscal_year,
            });
        }
    }

    for r in &mut records {
        if let Some(grade) = labels.get(&(r.company_id.clone(), r.fiscal_year)) {
            r.label = Some(grade.clone());
        }
    }
    Ok(records)
}

/// Keep only companies that have, for every year of `period`, exactly one
/// record with all feature values present and a label. The resulting
/// dataset has (surviving companies × period length) records; an empty
/// result is a warning, not an error.
pub fn filter_complete(
    records: &[CompanyYearRecord],
    manifest: &FeatureManifest,
    scale: &RatingScale,
    period: YearRange,
) -> Result<Dataset> {
    // Companies in first-appearance order for deterministic output.
    let mut companies: Vec<&str> = Vec::new();
    for r in records {
        if !companies.contains(&r.company_id.as_str()) {
            companies.push(&r.company_id);
        }
    }

    let mut surviving: Vec<CompanyYearRecord> = Vec::new();
    for company in &companies {
        let mut by_year: BTreeMap<i32, &CompanyYearRecord> = BTreeMap::new();
        let mut ok = true;
        for r in records.iter().filter(|r| r.company_id == *company) {
            if !period.contains(r.fiscal_year) {
                continue;
            }
            if by_year.insert(r.fiscal_year, r).is_some() {
                return Err(Error::DuplicateRecord {
                    company_id: (*company).to_string(),
                    fiscal_year: r.fiscal_year,
                });
            }
        }
        for year in period.years() {
            match by_year.get(&year) {
                Some(r) if r.is_complete() && r.label.is_some() => {}
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            surviving.extend(by_year.values().map(|r| (*r).clone()));
        }
    }

    if surviving.is_empty() {
        log::warn!(
            "completeness filter over {}..{} left no usable companies",
            period.start,
            period.end
        );
        return Dataset::new(Vec::new(), manifest.clone(), ClassIndexMap::empty());
    }

    let class_map = ClassIndexMap::build(
        surviving.iter().map(|r| r.label.as_deref().unwrap()),
        scale,
    )?;
    Dataset::new(surviving, manifest.clone(), class_map)
}

/// Write feature rows in the format [`load_financials`] reads. Missing
/// values become empty cells; present values round-trip bit-for-bit.
pub fn write_financials(
    path: &Path,
    manifest: &FeatureManifest,
    records: &[CompanyYearRecord],
) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    write!(out, "{COMPANY_COLUMN},{YEAR_COLUMN}")?;
    for name in manifest.field_names() {
        write!(out, ",{name}")?;
    }
    writeln!(out)?;
    for r in records {
        write!(out, "{},{}", r.company_id, r.fiscal_year)?;
        for v in &r.values {
            match v {
                Some(x) => write!(out, ",{x}")?,
                None => write!(out, ",")?,
            }
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

/// Write `(company_id, fiscal_year, rating)` rows for every labeled record.
pub fn write_labels(path: &Path, records: &[CompanyYearRecord]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{COMPANY_COLUMN},{YEAR_COLUMN},{RATING_COLUMN}")?;
    for r in records {
        if let Some(label) = &r.label {
            writeln!(out, "{},{},{}", r.company_id, r.fiscal_year, label)?;
        }
    }
    out.flush()?;
    Ok(())
}
