//! Per-benchmark preparation: raw schema, population filter, labels,
//! sensitive attributes, groups, split and feature encoding.
//!
//! | dataset | raw files                  | split                 | groups                         |
//! |---------|----------------------------|-----------------------|--------------------------------|
//! | adult   | `adult.data`, `adult.test` | predefined            | race (Black, White) × sex      |
//! | german  | `german.data`              | random 670/330        | age ≤ 30, age > 30             |
//! | bank    | `bank-additional-full.csv` | random 32950/8238     | training age quintiles         |
//! | crime   | `communities.data`         | random 1495/499       | race-fraction median patterns  |
//!
//! Every fitted statistic (vocabularies, bin edges, means, medians,
//! percentiles) comes from the training split.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use wfair_core::{Dataset, FeatureSchema, GroupId};

use crate::checksum;
use crate::encode::{bin_index, quantile_edges, quantile_linear, Directive, EncodingSpec, Encoder};
use crate::error::{DataError, Result};
use crate::manifest::{GroupInfo, Manifest, SourceStats, SplitStats};
use crate::split::split_indices;
use crate::table::{columns, load_csv, ColumnKind, ColumnSpec, LoadReport, RawTable, TableSchema};

use ColumnKind::{Categorical as C, Numeric as N};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Benchmark {
    Adult,
    German,
    Bank,
    Crime,
}

impl Benchmark {
    pub const ALL: [Benchmark; 4] = [Self::Adult, Self::German, Self::Bank, Self::Crime];

    pub fn name(self) -> &'static str {
        match self {
            Self::Adult => "adult",
            Self::German => "german",
            Self::Bank => "bank",
            Self::Crime => "crime",
        }
    }

    /// Raw files expected in the data directory.
    pub fn files(self) -> &'static [&'static str] {
        match self {
            Self::Adult => &["adult.data", "adult.test"],
            Self::German => &["german.data"],
            Self::Bank => &["bank-additional-full.csv"],
            Self::Crime => &["communities.data"],
        }
    }

    /// `(train, test)` sizes of the random split; `None` for a predefined one.
    pub fn split_sizes(self) -> Option<(usize, usize)> {
        match self {
            Self::Adult => None,
            Self::German => Some((670, 330)),
            Self::Bank => Some((32950, 8238)),
            Self::Crime => Some((1495, 499)),
        }
    }

    /// Published feature count, where one is given.
    pub fn reference_d(self) -> Option<usize> {
        match self {
            Self::Adult => Some(122),
            Self::Bank => Some(60),
            Self::German | Self::Crime => None,
        }
    }

    pub fn schema(self) -> TableSchema {
        match self {
            Self::Adult => TableSchema::new(columns(ADULT)).comment(b'|'),
            Self::German => TableSchema::new(columns(GERMAN)).delimiter(b' '),
            Self::Bank => TableSchema::new(columns(BANK)).delimiter(b';').header(true),
            Self::Crime => TableSchema::new(
                CRIME
                    .iter()
                    .map(|&name| ColumnSpec {
                        name: name.into(),
                        kind: if name == "communityname" { C } else { N },
                        optional: name != CRIME_TARGET,
                    })
                    .collect(),
            ),
        }
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Benchmark {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|b| b.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| DataError::UnknownDataset(s.into()))
    }
}

/// Encoded train and test splits with their manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct Prepared {
    pub train: Dataset,
    pub test: Dataset,
    pub manifest: Manifest,
}

/// Runs the recipe for `bench` on the raw files in `dir`. `seed` drives the
/// random split and is ignored for predefined splits.
pub fn prepare(bench: Benchmark, dir: &Path, seed: u64) -> Result<Prepared> {
    let sums = checksum::verify(dir, bench.files())?;
    match bench {
        Benchmark::Adult => adult(dir, &sums),
        Benchmark::German => german(dir, &sums, seed),
        Benchmark::Bank => bank(dir, &sums, seed),
        Benchmark::Crime => crime(dir, &sums, seed),
    }
}

const ADULT: &[(&str, ColumnKind)] = &[
    ("age", N),
    ("workclass", C),
    ("fnlwgt", N),
    ("education", C),
    ("education-num", N),
    ("marital-status", C),
    ("occupation", C),
    ("relationship", C),
    ("race", C),
    ("sex", C),
    ("capital-gain", N),
    ("capital-loss", N),
    ("hours-per-week", N),
    ("native-country", C),
    ("income", C),
];

const GERMAN: &[(&str, ColumnKind)] = &[
    ("status", C),
    ("duration", N),
    ("credit_history", C),
    ("purpose", C),
    ("amount", N),
    ("savings", C),
    ("employment", C),
    ("installment_rate", N),
    ("personal_status", C),
    ("other_debtors", C),
    ("residence_since", N),
    ("property", C),
    ("age", N),
    ("other_installment_plans", C),
    ("housing", C),
    ("existing_credits", N),
    ("job", C),
    ("people_liable", N),
    ("telephone", C),
    ("foreign_worker", C),
    ("credit", N),
];

const BANK: &[(&str, ColumnKind)] = &[
    ("age", N),
    ("job", C),
    ("marital", C),
    ("education", C),
    ("default", C),
    ("housing", C),
    ("loan", C),
    ("contact", C),
    ("month", C),
    ("day_of_week", C),
    ("duration", N),
    ("campaign", N),
    ("pdays", N),
    ("previous", N),
    ("poutcome", C),
    ("emp.var.rate", N),
    ("cons.price.idx", N),
    ("cons.conf.idx", N),
    ("euribor3m", N),
    ("nr.employed", N),
    ("y", C),
];

const CRIME_TARGET: &str = "ViolentCrimesPerPop";
const CRIME_ID: &[&str] = &["state", "county", "community", "communityname", "fold"];
const CRIME_RACE: [&str; 4] = ["racepctblack", "racePctWhite", "racePctAsian", "racePctHisp"];

const CRIME: &[&str] = &[
    "state", "county", "community", "communityname", "fold", "population", "householdsize",
    "racepctblack", "racePctWhite", "racePctAsian", "racePctHisp", "agePct12t21", "agePct12t29",
    "agePct16t24", "agePct65up", "numbUrban", "pctUrban", "medIncome", "pctWWage", "pctWFarmSelf",
    "pctWInvInc", "pctWSocSec", "pctWPubAsst", "pctWRetire", "medFamInc", "perCapInc", "whitePerCap",
    "blackPerCap", "indianPerCap", "AsianPerCap", "OtherPerCap", "HispPerCap", "NumUnderPov",
    "PctPopUnderPov", "PctLess9thGrade", "PctNotHSGrad", "PctBSorMore", "PctUnemployed", "PctEmploy",
    "PctEmplManu", "PctEmplProfServ", "PctOccupManu", "PctOccupMgmtProf", "MalePctDivorce",
    "MalePctNevMarr", "FemalePctDiv", "TotalPctDiv", "PersPerFam", "PctFam2Par", "PctKids2Par",
    "PctYoungKids2Par", "PctTeen2Par", "PctWorkMomYoung", "PctWorkMom", "NumIlleg", "PctIlleg",
    "NumImmig", "PctImmigRecent", "PctImmigRec5", "PctImmigRec8", "PctImmigRec10", "PctRecentImmig",
    "PctRecImmig5", "PctRecImmig8", "PctRecImmig10", "PctSpeakEnglOnly", "PctNotSpeakEnglWell",
    "PctLargHouseFam", "PctLargHouseOccup", "PersPerOccupHous", "PersPerOwnOccHous",
    "PersPerRentOccHous", "PctPersOwnOccup", "PctPersDenseHous", "PctHousLess3BR", "MedNumBR",
    "HousVacant", "PctHousOccup", "PctHousOwnOcc", "PctVacantBoarded", "PctVacMore6Mos",
    "MedYrHousBuilt", "PctHousNoPhone", "PctWOFullPlumb", "OwnOccLowQuart", "OwnOccMedVal",
    "OwnOccHiQuart", "RentLowQ", "RentMedian", "RentHighQ", "MedRent", "MedRentPctHousInc",
    "MedOwnCostPctInc", "MedOwnCostPctIncNoMtg", "NumInShelters", "NumStreet", "PctForeignBorn",
    "PctBornSameState", "PctSameHouse85", "PctSameCity85", "PctSameState85", "LemasSwornFT",
    "LemasSwFTPerPop", "LemasSwFTFieldOps", "LemasSwFTFieldPerPop", "LemasTotalReq",
    "LemasTotReqPerPop", "PolicReqPerOffic", "PolicPerPop", "RacialMatchCommPol", "PctPolicWhite",
    "PctPolicBlack", "PctPolicHisp", "PctPolicAsian", "PctPolicMinor", "OfficAssgnDrugUnits",
    "NumKindsDrugsSeiz", "PolicAveOTWorked", "LandArea", "PopDens", "PctUsePubTrans", "PolicCars",
    "PolicOperBudg", "LemasPctPolicOnPatr", "LemasGangUnitDeploy", "LemasPctOfficDrugUn",
    "PolicBudgPerPop", CRIME_TARGET,
];

/// Sensitive attributes, groups and labels for the rows of one table.
struct Roles {
    a: Vec<u32>,
    groups: Vec<GroupId>,
    labels: Vec<u8>,
}

/// Recipe-specific parts of [`assemble`].
struct Recipe<'a> {
    bench: Benchmark,
    split: String,
    spec: EncodingSpec,
    attribute_names: Vec<String>,
    /// Names of the groups the recipe defines. With `fixed_groups`, each must
    /// occur in the training split.
    group_names: BTreeMap<GroupId, String>,
    fixed_groups: bool,
    roles: &'a dyn Fn(&RawTable) -> Result<Roles>,
    sources: Vec<SourceStats>,
    dropped_columns: Vec<String>,
}

fn source(file: &str, sums: &[(String, String)], report: &LoadReport, filtered: usize) -> SourceStats {
    SourceStats {
        file: file.into(),
        sha256: sums.iter().find(|(f, _)| f == file).map(|(_, h)| h.clone()).unwrap_or_default(),
        rows: report.rows_read,
        dropped_missing: report.dropped_missing,
        dropped_malformed: report.dropped_malformed,
        dropped_filtered: filtered,
    }
}

fn assemble(r: Recipe<'_>, train: &RawTable, test: &RawTable) -> Result<Prepared> {
    let enc = Encoder::fit(&r.spec, train)?;
    let names = enc.feature_names();
    let (ex_tr, ex_te) = (enc.apply(train)?, enc.apply(test)?);
    let (ro_tr, ro_te) = ((r.roles)(train)?, (r.roles)(test)?);
    let k = r.attribute_names.len();

    let present: BTreeSet<GroupId> = ro_tr.groups.iter().copied().collect();
    if r.fixed_groups {
        let empty: Vec<&str> = r
            .group_names
            .iter()
            .filter(|(g, _)| !present.contains(g))
            .map(|(_, n)| n.as_str())
            .collect();
        if !empty.is_empty() {
            return Err(DataError::EmptyGroup(empty.join(", ")));
        }
    }
    let keep: Vec<usize> = (0..test.len()).filter(|&n| present.contains(&ro_te.groups[n])).collect();
    if keep.len() < test.len() {
        log::warn!("{}: {} test rows belong to groups absent from training", r.bench, test.len() - keep.len());
    }

    let d = enc.width();
    let build = |x: &[f64], ro: &Roles, rows: &[usize]| -> Result<Dataset> {
        let mut xs = Vec::with_capacity(rows.len() * d);
        let mut a = Vec::with_capacity(rows.len() * k);
        for &n in rows {
            xs.extend_from_slice(&x[n * d..(n + 1) * d]);
            a.extend_from_slice(&ro.a[n * k..(n + 1) * k]);
        }
        let ds = Dataset::new(
            FeatureSchema::new(d, k),
            xs,
            a,
            rows.iter().map(|&n| ro.labels[n]).collect(),
            rows.iter().map(|&n| ro.groups[n]).collect(),
        )?;
        Ok(ds.with_names(names.clone(), r.attribute_names.clone())?)
    };
    let all_train: Vec<usize> = (0..train.len()).collect();
    let train_ds = build(&ex_tr.x, &ro_tr, &all_train)?;
    let test_ds = build(&ex_te.x, &ro_te, &keep)?;

    let count = |ds: &Dataset, g: GroupId| ds.group_sizes().get(&g).copied().unwrap_or(0);
    let groups = present
        .iter()
        .map(|&g| GroupInfo {
            id: g,
            name: r.group_names.get(&g).cloned().unwrap_or_else(|| format!("group {}", g.0)),
            train: count(&train_ds, g),
            test: count(&test_ds, g),
        })
        .collect();
    let manifest = Manifest {
        dataset: r.bench.name().into(),
        split: r.split,
        sources: r.sources,
        train: SplitStats { rows: train_ds.len(), dropped_unseen_group: 0, unseen_categories: ex_tr.unseen },
        test: SplitStats {
            rows: test_ds.len(),
            dropped_unseen_group: test.len() - keep.len(),
            unseen_categories: ex_te.unseen,
        },
        d,
        k,
        reference_d: r.bench.reference_d(),
        groups,
        dropped_columns: r.dropped_columns,
        snapshots: Vec::new(),
    };
    if let Some(reference) = manifest.reference_d {
        if reference != d {
            log::warn!("{}: {d} encoded features, reference count {reference}", r.bench);
        }
    }
    Ok(Prepared { train: train_ds, test: test_ds, manifest })
}

fn random_split(bench: Benchmark, table: &RawTable, seed: u64) -> Result<(RawTable, RawTable, String)> {
    let (n_train, n_test) = bench.split_sizes().expect("random-split recipe");
    let (a, b) = split_indices(table.len(), n_train, n_test, seed)?;
    Ok((table.select(&a), table.select(&b), format!("random {n_train}/{n_test} seed {seed}")))
}

fn group_map(names: &[&str]) -> BTreeMap<GroupId, String> {
    names.iter().enumerate().map(|(g, n)| (GroupId(g as u32), n.to_string())).collect()
}

fn adult(dir: &Path, sums: &[(String, String)]) -> Result<Prepared> {
    let schema = Benchmark::Adult.schema();
    let mut tables = Vec::new();
    let mut sources = Vec::new();
    for file in Benchmark::Adult.files() {
        let (t, rep) = load_csv(&dir.join(file), &schema)?;
        let keep: Vec<bool> = t.categorical("race")?.iter().map(|r| r == "White" || r == "Black").collect();
        let filtered = keep.iter().filter(|&&k| !k).count();
        sources.push(source(file, sums, &rep, filtered));
        tables.push(t.filter(&keep));
    }
    let spec = EncodingSpec::new(ADULT.iter().map(|&(name, _)| {
        let d = match name {
            "race" | "sex" | "income" => Directive::Drop,
            "workclass" | "education" | "marital-status" | "occupation" | "relationship" | "native-country" => {
                Directive::OneHot
            }
            _ => Directive::QuantileBin(5),
        };
        (name, d)
    }));
    let roles = |t: &RawTable| -> Result<Roles> {
        let race = t.categorical("race")?;
        let sex = t.categorical("sex")?;
        let income = t.categorical("income")?;
        let mut out = Roles { a: Vec::new(), groups: Vec::new(), labels: Vec::new() };
        for n in 0..t.len() {
            let black = u32::from(race[n] == "Black");
            let male = u32::from(sex[n] == "Male");
            out.a.extend([black, male]);
            out.groups.push(GroupId(2 * black + male));
            out.labels.push(match income[n].trim_end_matches('.') {
                ">50K" => 1,
                "<=50K" => 0,
                other => {
                    return Err(DataError::Encoding { column: "income".into(), message: format!("label {other:?}") })
                }
            });
        }
        Ok(out)
    };
    let recipe = Recipe {
        bench: Benchmark::Adult,
        split: "predefined".into(),
        spec,
        attribute_names: vec!["black".into(), "male".into()],
        group_names: group_map(&["white female", "white male", "black female", "black male"]),
        fixed_groups: true,
        roles: &roles,
        sources,
        dropped_columns: Vec::new(),
    };
    assemble(recipe, &tables[0], &tables[1])
}

fn german(dir: &Path, sums: &[(String, String)], seed: u64) -> Result<Prepared> {
    let file = Benchmark::German.files()[0];
    let (table, rep) = load_csv(&dir.join(file), &Benchmark::German.schema())?;
    let (train, test, split) = random_split(Benchmark::German, &table, seed)?;
    let spec = EncodingSpec::new(GERMAN.iter().map(|&(name, kind)| {
        let d = match (name, kind) {
            ("age" | "credit", _) => Directive::Drop,
            (_, C) => Directive::OneHot,
            (_, N) => Directive::QuantileBin(5),
        };
        (name, d)
    }));
    let roles = |t: &RawTable| -> Result<Roles> {
        let age = t.numeric("age")?;
        let credit = t.numeric("credit")?;
        let mut out = Roles { a: Vec::new(), groups: Vec::new(), labels: Vec::new() };
        for n in 0..t.len() {
            let older = u32::from(age[n] > 30.0);
            out.a.push(older);
            out.groups.push(GroupId(older));
            out.labels.push(match credit[n] {
                1.0 => 1,
                2.0 => 0,
                other => {
                    return Err(DataError::Encoding { column: "credit".into(), message: format!("label {other}") })
                }
            });
        }
        Ok(out)
    };
    let recipe = Recipe {
        bench: Benchmark::German,
        split,
        spec,
        attribute_names: vec!["age>30".into()],
        group_names: group_map(&["age<=30", "age>30"]),
        fixed_groups: true,
        roles: &roles,
        sources: vec![source(file, sums, &rep, 0)],
        dropped_columns: Vec::new(),
    };
    assemble(recipe, &train, &test)
}

fn bank(dir: &Path, sums: &[(String, String)], seed: u64) -> Result<Prepared> {
    let file = Benchmark::Bank.files()[0];
    let (table, rep) = load_csv(&dir.join(file), &Benchmark::Bank.schema())?;
    let (train, test, split) = random_split(Benchmark::Bank, &table, seed)?;
    let spec = EncodingSpec::new(BANK.iter().map(|&(name, kind)| {
        let d = match (name, kind) {
            ("age" | "y", _) => Directive::Drop,
            ("cons.price.idx" | "cons.conf.idx" | "euribor3m" | "nr.employed", _) => Directive::Center,
            (_, C) => Directive::OneHot,
            (_, N) => Directive::QuantileBin(5),
        };
        (name, d)
    }));
    let edges = quantile_edges(train.numeric("age")?, 5);
    let roles = |t: &RawTable| -> Result<Roles> {
        let age = t.numeric("age")?;
        let y = t.categorical("y")?;
        let mut out = Roles { a: Vec::new(), groups: Vec::new(), labels: Vec::new() };
        for n in 0..t.len() {
            let q = bin_index(&edges, age[n]) as u32;
            out.a.extend((1..5).map(|j| u32::from(q == j)));
            out.groups.push(GroupId(q));
            out.labels.push(match y[n].as_str() {
                "yes" => 1,
                "no" => 0,
                other => return Err(DataError::Encoding { column: "y".into(), message: format!("label {other:?}") }),
            });
        }
        Ok(out)
    };
    let recipe = Recipe {
        bench: Benchmark::Bank,
        split,
        spec,
        attribute_names: (1..5).map(|j| format!("age:q{j}")).collect(),
        group_names: group_map(&["age:q0", "age:q1", "age:q2", "age:q3", "age:q4"]),
        fixed_groups: true,
        roles: &roles,
        sources: vec![source(file, sums, &rep, 0)],
        dropped_columns: Vec::new(),
    };
    assemble(recipe, &train, &test)
}

fn crime(dir: &Path, sums: &[(String, String)], seed: u64) -> Result<Prepared> {
    let file = Benchmark::Crime.files()[0];
    let (table, rep) = load_csv(&dir.join(file), &Benchmark::Crime.schema())?;
    let sparse: Vec<String> = table
        .columns_with_missing()
        .into_iter()
        .filter(|c| !CRIME_ID.contains(&c.as_str()))
        .collect();
    for race in CRIME_RACE {
        if sparse.iter().any(|c| c == race) {
            return Err(DataError::Encoding { column: race.into(), message: "missing values".into() });
        }
    }
    let ids: Vec<String> = CRIME_ID.iter().map(|s| s.to_string()).collect();
    let table = table.without(&sparse).without(&ids);
    let (train, test, split) = random_split(Benchmark::Crime, &table, seed)?;
    let spec = EncodingSpec::new(table.names().iter().map(|name| {
        let d = if name == CRIME_TARGET || CRIME_RACE.contains(&name.as_str()) {
            Directive::Drop
        } else {
            Directive::Passthrough
        };
        (name.clone(), d)
    }));

    let median = |c: &str| -> Result<f64> {
        let mut v = train.numeric(c)?.to_vec();
        v.sort_by(f64::total_cmp);
        Ok(quantile_linear(&v, 0.5))
    };
    let medians = CRIME_RACE.map(median);
    let medians: Vec<f64> = medians.into_iter().collect::<Result<_>>()?;
    let cutoff = {
        let mut v = train.numeric(CRIME_TARGET)?.to_vec();
        v.sort_by(f64::total_cmp);
        quantile_linear(&v, 0.7)
    };
    let roles = |t: &RawTable| -> Result<Roles> {
        let cols: Vec<&[f64]> = CRIME_RACE.iter().map(|c| t.numeric(c)).collect::<Result<_>>()?;
        let target = t.numeric(CRIME_TARGET)?;
        let mut out = Roles { a: Vec::new(), groups: Vec::new(), labels: Vec::new() };
        for n in 0..t.len() {
            let mut id = 0;
            for (j, col) in cols.iter().enumerate() {
                let bit = u32::from(col[n] > medians[j]);
                out.a.push(bit);
                id = (id << 1) | bit;
            }
            out.groups.push(GroupId(id));
            out.labels.push(u8::from(target[n] > cutoff));
        }
        Ok(out)
    };
    let group_names = (0..16u32)
        .map(|id| (GroupId(id), format!("bwah={:04b}", id)))
        .collect();
    let recipe = Recipe {
        bench: Benchmark::Crime,
        split,
        spec,
        attribute_names: CRIME_RACE.iter().map(|c| format!("{c}>median")).collect(),
        group_names,
        fixed_groups: false,
        roles: &roles,
        sources: vec![source(file, sums, &rep, 0)],
        dropped_columns: sparse,
    };
    assemble(recipe, &train, &test)
}
