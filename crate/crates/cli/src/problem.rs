//! Problem files: one weighting, one system, a list of query vectors.
//!
//! Subsets are sorted 1-based index lists. The canonical text form is what
//! [`ProblemFile::to_canonical`] writes; parsing it back and writing again is
//! byte-identical.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use decint::classical::LevelDependentCapacity;
use decint::decomp::DEFAULT_GRID_STEP;
use decint::domain::{
    Capacity, ClosedForm, CoefficientDomain, CollectionConstraint, DecompSystem, Generators,
    NNVector, SubsetMask,
};
use decint::{Base, Weighting};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("{0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported format version {0} (expected {FORMAT_VERSION})")]
    Version(u32),
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("field `{field}`: {source}")]
    Core {
        field: String,
        #[source]
        source: decint::Error,
    },
}

fn field(field: impl Into<String>, message: impl Into<String>) -> ProblemError {
    ProblemError::Field {
        field: field.into(),
        message: message.into(),
    }
}

fn core(field: impl Into<String>) -> impl FnOnce(decint::Error) -> ProblemError {
    let field = field.into();
    move |source| ProblemError::Core { field, source }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Letter used for the weighting in `explain` output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol: Option<String>,
    pub n: usize,
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<Vec<SubsetValue>>,
    /// `product` (default) values `c * 1_E` as `c * m(E)`, `min` as `min(c, m(E))`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity_weighting: Option<CapacityWeighting>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<VectorValue>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<ClosedFormSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level_capacity: Option<LevelCapacitySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemSpec>,
    #[serde(default)]
    pub queries: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsetValue {
    pub subset: Vec<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorValue {
    pub vector: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapacityWeighting {
    Product,
    Min,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosedFormSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelCapacitySpec {
    pub breakpoints: Vec<f64>,
    pub slices: Vec<Vec<SubsetValue>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub generators: GeneratorSpec,
    #[serde(default = "default_coefficients")]
    pub coefficients: CoefficientSpec,
    #[serde(default = "default_constraint")]
    pub constraint: ConstraintSpec,
}

fn default_coefficients() -> CoefficientSpec {
    CoefficientSpec::Unit
}

fn default_constraint() -> ConstraintSpec {
    ConstraintSpec::Any
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorSpec {
    /// The vectors of the weighting table.
    Table,
    Indicators,
    List(Vec<Vec<f64>>),
    BoxGrid {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        upper: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        step: Option<f64>,
    },
    Collections(Vec<Vec<Vec<f64>>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientSpec {
    Unit,
    Int,
    Real,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintSpec {
    Any,
    Chain,
    Partition,
    Comonotone,
    DisjointSupport(usize),
    MaxParts(usize),
}

impl From<ConstraintSpec> for CollectionConstraint {
    fn from(c: ConstraintSpec) -> Self {
        match c {
            ConstraintSpec::Any => Self::Any,
            ConstraintSpec::Chain => Self::Chain,
            ConstraintSpec::Partition => Self::Partition,
            ConstraintSpec::Comonotone => Self::Comonotone,
            ConstraintSpec::DisjointSupport(k) => Self::DisjointSupport(k),
            ConstraintSpec::MaxParts(k) => Self::MaxParts(k),
        }
    }
}

impl From<CoefficientSpec> for CoefficientDomain {
    fn from(c: CoefficientSpec) -> Self {
        match c {
            CoefficientSpec::Unit => Self::Unit,
            CoefficientSpec::Int => Self::NonNegInt,
            CoefficientSpec::Real => Self::NonNegReal,
        }
    }
}

/// Command-line adjustments applied when the base is built.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub grid_step: Option<f64>,
    pub max_parts: Option<usize>,
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, ProblemError> {
        let file: Self = serde_json::from_str(text)?;
        file.validate()?;
        Ok(file)
    }

    pub fn to_canonical(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("problem files always serialize");
        s.push('\n');
        s
    }

    fn validate(&self) -> Result<(), ProblemError> {
        if self.version != FORMAT_VERSION {
            return Err(ProblemError::Version(self.version));
        }
        if self.n == 0 || self.n > decint::domain::MAX_GROUND_SET {
            return Err(field(
                "n",
                format!("must be in 1..={}", decint::domain::MAX_GROUND_SET),
            ));
        }
        let sources = [
            self.capacity.is_some(),
            self.table.is_some(),
            self.closed_form.is_some(),
            self.level_capacity.is_some(),
        ];
        match sources.iter().filter(|s| **s).count() {
            1 => {}
            0 => {
                return Err(field(
                    "capacity",
                    "one of capacity, table, closed_form, level_capacity is required",
                ))
            }
            _ => {
                return Err(field(
                    "capacity",
                    "capacity, table, closed_form and level_capacity are exclusive",
                ))
            }
        }
        if self.capacity_weighting.is_some() && self.capacity.is_none() {
            return Err(field(
                "capacity_weighting",
                "only applies together with `capacity`",
            ));
        }
        for (i, q) in self.queries.iter().enumerate() {
            self.check_vector(&format!("queries[{i}]"), q)?;
        }
        if let Some(rows) = &self.table {
            for (i, r) in rows.iter().enumerate() {
                self.check_vector(&format!("table[{i}].vector"), &r.vector)?;
            }
        }
        if let Some(rows) = &self.capacity {
            check_subsets("capacity", rows, self.n)?;
        }
        if let Some(level) = &self.level_capacity {
            for (i, rows) in level.slices.iter().enumerate() {
                check_subsets(&format!("level_capacity.slices[{i}]"), rows, self.n)?;
            }
        }
        if let Some(system) = &self.system {
            match &system.generators {
                GeneratorSpec::List(list) => {
                    for (i, g) in list.iter().enumerate() {
                        self.check_vector(&format!("system.generators.list[{i}]"), g)?;
                    }
                }
                GeneratorSpec::Collections(cs) => {
                    for (i, c) in cs.iter().enumerate() {
                        for (j, g) in c.iter().enumerate() {
                            self.check_vector(
                                &format!("system.generators.collections[{i}][{j}]"),
                                g,
                            )?;
                        }
                    }
                }
                GeneratorSpec::Table if self.table.is_none() => {
                    return Err(field(
                        "system.generators",
                        "`table` generators need a weighting table",
                    ));
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn check_vector(&self, name: &str, v: &[f64]) -> Result<(), ProblemError> {
        if v.len() != self.n {
            return Err(field(
                name,
                format!("has length {}, expected n = {}", v.len(), self.n),
            ));
        }
        NNVector::new(v.to_vec()).map(|_| ()).map_err(core(name))
    }

    pub fn query_vectors(&self) -> Result<Vec<NNVector>, ProblemError> {
        self.queries
            .iter()
            .enumerate()
            .map(|(i, q)| NNVector::new(q.clone()).map_err(core(format!("queries[{i}]"))))
            .collect()
    }

    pub fn capacity(&self) -> Result<Option<Capacity>, ProblemError> {
        self.capacity
            .as_ref()
            .map(|rows| capacity_from("capacity", rows, self.n))
            .transpose()
    }

    pub fn level_capacity(&self) -> Result<Option<LevelDependentCapacity>, ProblemError> {
        let Some(spec) = &self.level_capacity else {
            return Ok(None);
        };
        let slices = spec
            .slices
            .iter()
            .enumerate()
            .map(|(i, rows)| capacity_from(&format!("level_capacity.slices[{i}]"), rows, self.n))
            .collect::<Result<Vec<_>, _>>()?;
        LevelDependentCapacity::new(spec.breakpoints.clone(), slices, spec.upper)
            .map(Some)
            .map_err(core("level_capacity"))
    }

    pub fn weighting(&self) -> Result<Weighting, ProblemError> {
        if let Some(m) = self.capacity()? {
            return Ok(
                match self
                    .capacity_weighting
                    .unwrap_or(CapacityWeighting::Product)
                {
                    CapacityWeighting::Product => Weighting::CapacityInduced(m),
                    CapacityWeighting::Min => Weighting::CapacityMin(m),
                },
            );
        }
        if let Some(rows) = &self.table {
            let rows = rows
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let v = NNVector::new(r.vector.clone())
                        .map_err(core(format!("table[{i}].vector")))?;
                    if !(r.value.is_finite() && r.value >= 0.0) {
                        return Err(field(
                            format!("table[{i}].value"),
                            "must be finite and nonnegative",
                        ));
                    }
                    Ok((v, r.value))
                })
                .collect::<Result<Vec<_>, _>>()?;
            return Ok(Weighting::Table(rows));
        }
        if let Some(spec) = &self.closed_form {
            return ClosedForm::from_name(&spec.name, &spec.params)
                .map(Weighting::ClosedForm)
                .map_err(core("closed_form"));
        }
        Err(field(
            "level_capacity",
            "a level-dependent capacity is only usable with classical:level_choquet",
        ))
    }

    /// The system of the file, or the natural one for its weighting.
    pub fn system(
        &self,
        weighting: &Weighting,
        overrides: Overrides,
    ) -> Result<DecompSystem, ProblemError> {
        let spec = match &self.system {
            Some(s) => s.clone(),
            None => SystemSpec {
                generators: match weighting {
                    Weighting::Table(_) => GeneratorSpec::Table,
                    Weighting::ClosedForm(_) => GeneratorSpec::BoxGrid {
                        upper: None,
                        step: None,
                    },
                    _ => GeneratorSpec::Indicators,
                },
                coefficients: match weighting {
                    Weighting::CapacityInduced(_) => CoefficientSpec::Real,
                    _ => CoefficientSpec::Unit,
                },
                constraint: ConstraintSpec::Any,
            },
        };
        let to_vec = |name: String, v: &Vec<f64>| NNVector::new(v.clone()).map_err(core(name));
        let generators = match &spec.generators {
            GeneratorSpec::Table => match weighting {
                Weighting::Table(rows) => {
                    Generators::List(rows.iter().map(|(g, _)| g.clone()).collect())
                }
                _ => {
                    return Err(field(
                        "system.generators",
                        "`table` generators need a weighting table",
                    ))
                }
            },
            GeneratorSpec::Indicators => Generators::Indicators,
            GeneratorSpec::List(list) => Generators::List(
                list.iter()
                    .enumerate()
                    .map(|(i, g)| to_vec(format!("system.generators.list[{i}]"), g))
                    .collect::<Result<_, _>>()?,
            ),
            GeneratorSpec::BoxGrid { upper, step } => {
                let form_upper = match weighting {
                    Weighting::ClosedForm(form) => form.domain_upper(),
                    _ => None,
                };
                Generators::BoxGrid {
                    upper: upper.or(form_upper),
                    step: overrides.grid_step.or(*step).unwrap_or(DEFAULT_GRID_STEP),
                }
            }
            GeneratorSpec::Collections(cs) => Generators::Collections(
                cs.iter()
                    .enumerate()
                    .map(|(i, c)| {
                        c.iter()
                            .enumerate()
                            .map(|(j, g)| {
                                to_vec(format!("system.generators.collections[{i}][{j}]"), g)
                            })
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<_, _>>()?,
            ),
        };
        let constraint = match overrides.max_parts {
            Some(k) => CollectionConstraint::MaxParts(k),
            None => spec.constraint.into(),
        };
        DecompSystem::new(self.n, generators, spec.coefficients.into(), constraint)
            .map_err(core("system"))
    }

    pub fn base(&self, overrides: Overrides) -> Result<Base, ProblemError> {
        let weighting = self.weighting()?;
        let system = self.system(&weighting, overrides)?;
        Base::new(system, weighting).map_err(core("system"))
    }
}

fn check_subsets(name: &str, rows: &[SubsetValue], n: usize) -> Result<(), ProblemError> {
    for (i, r) in rows.iter().enumerate() {
        if r.subset.windows(2).any(|w| w[0] >= w[1]) {
            return Err(field(
                format!("{name}[{i}].subset"),
                "must be a strictly increasing list",
            ));
        }
        SubsetMask::from_one_based(&r.subset, n).map_err(core(format!("{name}[{i}].subset")))?;
    }
    Ok(())
}

/// Missing subsets default to 0 only for the empty set.
fn capacity_from(name: &str, rows: &[SubsetValue], n: usize) -> Result<Capacity, ProblemError> {
    let mut pairs = vec![(SubsetMask(0), 0.0)];
    for (i, r) in rows.iter().enumerate() {
        let set = SubsetMask::from_one_based(&r.subset, n)
            .map_err(core(format!("{name}[{i}].subset")))?;
        pairs.push((set, r.value));
    }
    let m = Capacity::from_pairs(n, pairs).map_err(core(name))?;
    decint::domain::validate_capacity(&m).map_err(|v| field(name, v.to_string()))?;
    Ok(m)
}
