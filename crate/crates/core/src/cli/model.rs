//! The JSON model file: named spaces, metrics, measures, functions,
//! kernels, relations, functionals and partitions.
//!
//! Rationals are written as strings (`"1/2"`, `"3"`, `"0.25"`) or JSON
//! integers. Weight and value lists are indexed by atom, atoms being
//! ordered by their least point. See `docs/model-format.md`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{parse_rational, Q};
use crate::error::Error;
use crate::integrate::StepFunction;
use crate::kernels::{Kernel, KernelKind};
use crate::measures::{LinearFunctional, Measure, SignedMeasure};
use crate::metrics::FiniteMetric;
use crate::spaces::{product_space, FiniteMeasurableSpace, Partition, SpaceRef};

/// An exact rational as it appears in a model file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rat(pub Q);

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct RatVisitor;

        impl Visitor<'_> for RatVisitor {
            type Value = Rat;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a rational as a string like \"1/2\" or an integer")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rat, E> {
                Ok(Rat(Q::from_integer(v.into())))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rat, E> {
                Ok(Rat(Q::from_integer(v.into())))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Rat, E> {
                Err(E::custom(format!("float {v} is not exact; quote it as a string")))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Rat, E> {
                parse_rational(v).map(Rat).map_err(E::custom)
            }
        }

        d.deserialize_any(RatVisitor)
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<String>>,
    /// Generating sets; the σ-algebra is the one they generate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<Vec<Vec<String>>>,
    /// Explicit atoms; omitted together with `generator` means discrete.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<Vec<String>>>,
    /// Names of two spaces whose product this is.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub product: Option<[String; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    /// A discrete space supplying the point list.
    pub space: String,
    pub distances: Vec<Vec<Rat>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    pub space: String,
    pub weights: Vec<Rat>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub signed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    pub space: String,
    pub values: Vec<Rat>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub domain: String,
    pub codomain: String,
    /// `finite`, `subMarkov` or `Markov`; inferred from the rows when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub rows: Vec<Vec<Rat>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationSpec {
    pub left: String,
    pub right: String,
    /// Point-label pairs; each pair relates the atoms containing them.
    pub pairs: Vec<[String; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalSpec {
    pub space: String,
    /// Values on the atom indicators.
    pub values: Vec<Rat>,
    pub total: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionSpec {
    pub space: String,
    pub blocks: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub spaces: BTreeMap<String, SpaceSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metrics: BTreeMap<String, MetricSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub measures: BTreeMap<String, MeasureSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub functions: BTreeMap<String, FunctionSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub kernels: BTreeMap<String, KernelSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub relations: BTreeMap<String, RelationSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub functionals: BTreeMap<String, FunctionalSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub partitions: BTreeMap<String, PartitionSpec>,
}

/// Why a model file could not be loaded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LoadError {
    Syntax(String),
    Reference(String),
    /// A library invariant failed on `entry`.
    Invalid {
        entry: String,
        error: Error,
    },
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::Syntax(m) => write!(f, "malformed model file: {m}"),
            LoadError::Reference(m) => write!(f, "unresolved reference: {m}"),
            LoadError::Invalid { entry, error } => write!(f, "{entry}: {error}"),
        }
    }
}

impl std::error::Error for LoadError {}

impl LoadError {
    pub fn code(&self) -> &'static str {
        match self {
            LoadError::Syntax(_) => "Syntax",
            LoadError::Reference(_) => "Reference",
            LoadError::Invalid { error, .. } => error.code(),
        }
    }
}

/// Support relation between the atoms of two spaces.
#[derive(Debug, Clone)]
pub struct AtomRelation {
    pub left: SpaceRef,
    pub right: SpaceRef,
    pub pairs: Vec<(usize, usize)>,
}

/// A validated model with every reference resolved.
#[derive(Debug, Clone, Default)]
pub struct Model {
    pub spaces: BTreeMap<String, SpaceRef>,
    pub metrics: BTreeMap<String, FiniteMetric>,
    pub measures: BTreeMap<String, Measure>,
    pub signed: BTreeMap<String, SignedMeasure>,
    pub functions: BTreeMap<String, StepFunction>,
    pub kernels: BTreeMap<String, Kernel>,
    pub relations: BTreeMap<String, AtomRelation>,
    pub functionals: BTreeMap<String, LinearFunctional>,
    pub partitions: BTreeMap<String, Partition>,
    canonical: ModelFile,
}

fn invalid(entry: String) -> impl FnOnce(Error) -> LoadError {
    move |error| LoadError::Invalid { entry, error }
}

fn rats(v: &[Rat]) -> Vec<Q> {
    v.iter().map(|r| r.0.clone()).collect()
}

fn point_sets(space: &SpaceRef, sets: &[Vec<String>]) -> Result<Vec<Vec<usize>>, Error> {
    sets.iter()
        .map(|s| s.iter().map(|l| space.point_index(l)).collect())
        .collect()
}

fn label_sets(space: &FiniteMeasurableSpace, sets: &[Vec<usize>]) -> Vec<Vec<String>> {
    sets.iter()
        .map(|s| s.iter().map(|&p| space.points()[p].clone()).collect())
        .collect()
}

impl Model {
    pub fn from_json(text: &str) -> Result<Model, LoadError> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| LoadError::Syntax(e.to_string()))?;
        Model::resolve(&file)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Model, LoadError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LoadError::Syntax(format!("cannot read {}: {e}", path.display())))?;
        Model::from_json(&text)
    }

    /// The canonical form: explicit atoms, exact rationals as strings,
    /// inferred kernel kinds made explicit.
    pub fn canonical(&self) -> &ModelFile {
        &self.canonical
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.canonical).expect("model files serialize")
    }

    pub fn resolve(file: &ModelFile) -> Result<Model, LoadError> {
        let mut model = Model::default();
        for name in file.spaces.keys() {
            model.resolve_space(file, name, &mut Vec::new())?;
        }
        let space = |model: &Model, owner: &str, name: &str| -> Result<SpaceRef, LoadError> {
            model
                .spaces
                .get(name)
                .cloned()
                .ok_or_else(|| LoadError::Reference(format!("{owner} refers to unknown space `{name}`")))
        };

        for (name, spec) in &file.metrics {
            let entry = format!("metric `{name}`");
            let s = space(&model, &entry, &spec.space)?;
            let dist = spec.distances.iter().map(|r| rats(r)).collect();
            let m = FiniteMetric::new(&s, dist).map_err(invalid(entry))?;
            model.canonical.metrics.insert(name.clone(), spec.clone());
            model.metrics.insert(name.clone(), m);
        }
        for (name, spec) in &file.measures {
            let entry = format!("measure `{name}`");
            let s = space(&model, &entry, &spec.space)?;
            let weights = rats(&spec.weights);
            if spec.signed {
                let m = SignedMeasure::new(&s, weights).map_err(invalid(entry))?;
                model.signed.insert(name.clone(), m);
            } else {
                let m = Measure::new(&s, weights).map_err(invalid(entry))?;
                model.measures.insert(name.clone(), m);
            }
            model.canonical.measures.insert(name.clone(), spec.clone());
        }
        for (name, spec) in &file.functions {
            let entry = format!("function `{name}`");
            let s = space(&model, &entry, &spec.space)?;
            let f = StepFunction::new(&s, rats(&spec.values)).map_err(invalid(entry))?;
            model.canonical.functions.insert(name.clone(), spec.clone());
            model.functions.insert(name.clone(), f);
        }
        for (name, spec) in &file.kernels {
            let entry = format!("kernel `{name}`");
            let dom = space(&model, &entry, &spec.domain)?;
            let cod = space(&model, &entry, &spec.codomain)?;
            let rows = spec.rows.iter().map(|r| rats(r)).collect::<Vec<_>>();
            let k = match &spec.kind {
                Some(kind) => {
                    let kind = KernelKind::parse(kind)
                        .ok_or_else(|| LoadError::Syntax(format!("{entry}: unknown kind `{kind}`")))?;
                    Kernel::new(&dom, &cod, rows, kind)
                }
                None => rows
                    .into_iter()
                    .map(|r| Measure::new(&cod, r))
                    .collect::<Result<Vec<_>, _>>()
                    .and_then(|rows| Kernel::inferred(&dom, &cod, rows)),
            }
            .map_err(invalid(entry))?;
            let mut canon = spec.clone();
            canon.kind = Some(k.kind().name().to_string());
            model.canonical.kernels.insert(name.clone(), canon);
            model.kernels.insert(name.clone(), k);
        }
        for (name, spec) in &file.relations {
            let entry = format!("relation `{name}`");
            let left = space(&model, &entry, &spec.left)?;
            let right = space(&model, &entry, &spec.right)?;
            let mut pairs = spec
                .pairs
                .iter()
                .map(|[l, r]| Ok((left.atom_of(left.point_index(l)?), right.atom_of(right.point_index(r)?))))
                .collect::<Result<Vec<_>, Error>>()
                .map_err(invalid(entry))?;
            pairs.sort_unstable();
            pairs.dedup();
            let canon_pairs = pairs
                .iter()
                .map(|&(i, j)| [left.atom_label(i).to_string(), right.atom_label(j).to_string()])
                .collect();
            model.canonical.relations.insert(
                name.clone(),
                RelationSpec {
                    left: spec.left.clone(),
                    right: spec.right.clone(),
                    pairs: canon_pairs,
                },
            );
            model
                .relations
                .insert(name.clone(), AtomRelation { left, right, pairs });
        }
        for (name, spec) in &file.functionals {
            let entry = format!("functional `{name}`");
            let s = space(&model, &entry, &spec.space)?;
            let l = LinearFunctional::new(&s, rats(&spec.values), spec.total.0.clone()).map_err(invalid(entry))?;
            model.canonical.functionals.insert(name.clone(), spec.clone());
            model.functionals.insert(name.clone(), l);
        }
        for (name, spec) in &file.partitions {
            let entry = format!("partition `{name}`");
            let s = space(&model, &entry, &spec.space)?;
            let p = Partition::from_labels(&s, &spec.blocks).map_err(invalid(entry))?;
            model.canonical.partitions.insert(
                name.clone(),
                PartitionSpec {
                    space: spec.space.clone(),
                    blocks: label_sets(&s, p.blocks()),
                },
            );
            model.partitions.insert(name.clone(), p);
        }
        Ok(model)
    }

    fn resolve_space(&mut self, file: &ModelFile, name: &str, stack: &mut Vec<String>) -> Result<SpaceRef, LoadError> {
        if let Some(s) = self.spaces.get(name) {
            return Ok(s.clone());
        }
        if stack.iter().any(|n| n == name) {
            return Err(LoadError::Reference(format!(
                "space `{name}` is defined through itself"
            )));
        }
        let spec = file
            .spaces
            .get(name)
            .ok_or_else(|| LoadError::Reference(format!("unknown space `{name}`")))?;
        let entry = format!("space `{name}`");
        let shape_error = |m: &str| LoadError::Syntax(format!("{entry}: {m}"));
        let (space, canon) = if let Some([l, r]) = &spec.product {
            if spec.points.is_some() || spec.generator.is_some() || spec.atoms.is_some() {
                return Err(shape_error("a product takes no points, generator or atoms"));
            }
            stack.push(name.to_string());
            let left = self.resolve_space(file, l, stack)?;
            let right = self.resolve_space(file, r, stack)?;
            stack.pop();
            let canon = SpaceSpec {
                product: Some([l.clone(), r.clone()]),
                ..SpaceSpec::default()
            };
            (product_space(&left, &right), canon)
        } else {
            let points = spec.points.clone().ok_or_else(|| shape_error("`points` is required"))?;
            let built = match (&spec.generator, &spec.atoms) {
                (Some(_), Some(_)) => return Err(shape_error("give either `generator` or `atoms`")),
                (Some(g), None) => Self::labelled(&points, g)
                    .and_then(|g| FiniteMeasurableSpace::sigma_from_generator(points.clone(), &g)),
                (None, Some(a)) => {
                    Self::labelled(&points, a).and_then(|a| FiniteMeasurableSpace::from_atoms(points.clone(), a))
                }
                (None, None) => FiniteMeasurableSpace::discrete(points.clone()),
            }
            .map_err(invalid(entry))?;
            let canon = SpaceSpec {
                points: Some(points),
                atoms: (!built.is_discrete()).then(|| label_sets(&built, built.atoms())),
                ..SpaceSpec::default()
            };
            (Arc::new(built), canon)
        };
        self.canonical.spaces.insert(name.to_string(), canon);
        self.spaces.insert(name.to_string(), space.clone());
        Ok(space)
    }

    fn labelled(points: &[String], sets: &[Vec<String>]) -> Result<Vec<Vec<usize>>, Error> {
        let probe = Arc::new(FiniteMeasurableSpace::discrete(points.to_vec())?);
        point_sets(&probe, sets)
    }

    pub fn space(&self, name: &str) -> Option<&SpaceRef> {
        self.spaces.get(name)
    }
}
