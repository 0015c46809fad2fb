//! JSON file formats. Variables and levels are 0-based in every file.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use mbk_core::chordal::CliqueTree;
use mbk_core::{Cell, MarginalVector, ModelSpec, Move, Table, VarSet};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const MODEL_SCHEMA: &str = r#"model file: {"levels":[2,2,2],"facets":[[0],[1],[2]]}"#;
pub const TABLE_SCHEMA: &str = r#"table file: {"cells":[[[0,0,0],1],[[1,1,1],1]]}"#;
pub const MOVES_SCHEMA: &str = r#"moves file: [{"pos":[[[0,0],1],[[1,1],1]],"neg":[[[0,1],1],[[1,0],1]]}]"#;
pub const TREE_SCHEMA: &str = r#"tree file: {"cliques":[[0,1],[1,2]],"edges":[[0,1]]}"#;
pub const B_SCHEMA: &str = r#"marginals file: {"marginals":[[[[0,0],1],[[1,1],1]],[[[0],1],[[1],1]]]} (one list per facet, cells over the facet's variables)"#;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub levels: Vec<u32>,
    pub facets: Vec<Vec<usize>>,
}

pub type CellCounts = Vec<(Vec<u32>, u64)>;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableFile {
    pub cells: CellCounts,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoveFile {
    pub pos: CellCounts,
    pub neg: CellCounts,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeFile {
    pub cliques: Vec<Vec<usize>>,
    pub edges: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginalsFile {
    pub marginals: Vec<CellCounts>,
}

fn read_json<T: DeserializeOwned>(path: &Path, schema: &'static str) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
        schema,
    })
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string(value).expect("serializable");
    text.push('\n');
    fs::write(path, text).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn counts(t: &Table) -> CellCounts {
    t.iter().map(|(c, n)| (c.0.clone(), n)).collect()
}

fn table(cells: CellCounts) -> Table {
    Table::from_counts(cells.into_iter().filter(|&(_, n)| n > 0).map(|(c, n)| (Cell(c), n)))
}

pub fn read_model(path: &Path) -> Result<ModelSpec, CliError> {
    let f: ModelFile = read_json(path, MODEL_SCHEMA)?;
    Ok(ModelSpec::new(f.levels, &f.facets)?)
}

pub fn read_table(path: &Path, model: &ModelSpec) -> Result<Table, CliError> {
    let f: TableFile = read_json(path, TABLE_SCHEMA)?;
    let t = table(f.cells);
    t.check_cells(model)?;
    Ok(t)
}

pub fn read_moves(path: &Path, model: &ModelSpec) -> Result<Vec<Move>, CliError> {
    let f: Vec<MoveFile> = read_json(path, MOVES_SCHEMA)?;
    let mut out = Vec::with_capacity(f.len());
    for m in f {
        let (pos, neg) = (table(m.pos), table(m.neg));
        pos.check_cells(model)?;
        neg.check_cells(model)?;
        out.push(Move::new(pos, neg, model)?);
    }
    Ok(out)
}

pub fn write_moves<'a>(path: &Path, moves: impl IntoIterator<Item = &'a Move>) -> Result<(), CliError> {
    let list: Vec<MoveFile> = moves
        .into_iter()
        .map(|z| MoveFile {
            pos: counts(z.pos()),
            neg: counts(z.neg()),
        })
        .collect();
    write_json(path, &list)
}

pub fn read_tree(path: &Path) -> Result<CliqueTree, CliError> {
    let f: TreeFile = read_json(path, TREE_SCHEMA)?;
    let cliques = f.cliques.iter().map(|c| c.iter().copied().collect::<VarSet>()).collect();
    Ok(CliqueTree::new(cliques, f.edges)?)
}

pub fn read_marginals(path: &Path, model: &ModelSpec) -> Result<MarginalVector, CliError> {
    let f: MarginalsFile = read_json(path, B_SCHEMA)?;
    let facets: Vec<BTreeMap<Cell, u64>> = f
        .marginals
        .into_iter()
        .map(|m| {
            let mut map = BTreeMap::new();
            for (c, n) in m {
                if n > 0 {
                    *map.entry(Cell(c)).or_insert(0) += n;
                }
            }
            map
        })
        .collect();
    Ok(MarginalVector::from_facet_marginals(model, facets)?)
}

