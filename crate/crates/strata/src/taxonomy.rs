//! The category hierarchy and label paths through it.
//!
//! A [`Taxonomy`] is a tree of category nodes: a single root at level 0 and
//! classification levels 1 through `L`. Every leaf sits at level `L`
//! (uniform depth), every node carries a short label text, and the ordered
//! category list of each level defines the class-index mapping used by that
//! level's classifier.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::tokenize;

/// Identifier of a category node. Lexicographic order of ids fixes the
/// class-index order at each level.
pub type NodeId = String;

#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error("edge list is empty")]
    EmptyEdgeList,
    #[error("cycle detected at node {0}")]
    Cycle(NodeId),
    #[error("node {0} has two parents")]
    TwoParents(NodeId),
    #[error("node {0} is a leaf at level {1}, expected uniform depth {2}")]
    NonUniformDepth(NodeId, usize, usize),
    #[error("node {0} is unreachable from the root")]
    Unreachable(NodeId),
    #[error("node {0} has no label")]
    MissingLabel(NodeId),
    #[error("node {0} has an empty label text")]
    EmptyLabel(NodeId),
    #[error("root {0} must not appear as a child")]
    RootHasParent(NodeId),
    #[error("level {0} out of range 1..={1}")]
    LevelOutOfRange(usize, usize),
    #[error("path has {got} labels, taxonomy has {expected} levels")]
    PathLength { got: usize, expected: usize },
    #[error("path element {0} is not a node at level {1}")]
    PathLevelMismatch(NodeId, usize),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("taxonomy file line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// One node of the hierarchy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Node {
    label: String,
    parent: Option<NodeId>,
    level: usize,
}

/// The category hierarchy: a uniform-depth tree with a label on every node.
///
/// Immutable after construction, so it can be shared freely.
#[derive(Debug, Clone, PartialEq)]
pub struct Taxonomy {
    root: NodeId,
    nodes: BTreeMap<NodeId, Node>,
    /// Node ids per level, index 0 = `[root]`, sorted lexicographically.
    levels: Vec<Vec<NodeId>>,
}

/// A label path: one node id per classification level, positions 1..=L.
///
/// Predicted paths are allowed to be edge-inconsistent (each level is
/// classified independently); use [`Taxonomy::validate_path`] to check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelPath(pub Vec<NodeId>);

impl LabelPath {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Node id at classification level `level` (1-based).
    pub fn at_level(&self, level: usize) -> &NodeId {
        &self.0[level - 1]
    }
}

/// Record format of the taxonomy file: one JSON object per line.
/// The root record has `"parent": null`.
#[derive(Debug, Serialize, Deserialize)]
struct TaxonomyRecord {
    id: NodeId,
    label: String,
    parent: Option<NodeId>,
}

/// Build a [`Taxonomy`] from parent-child edges and per-node label texts.
///
/// Levels are assigned by breadth-first traversal from `root`; the
/// construction fails on cycles, multiple parents, unreachable nodes,
/// missing or untokenizable labels, and non-uniform leaf depth.
pub fn build_taxonomy(
    edges: &[(NodeId, NodeId)],
    labels: &BTreeMap<NodeId, String>,
    root: &str,
) -> Result<Taxonomy, TaxonomyError> {
    if edges.is_empty() {
        return Err(TaxonomyError::EmptyEdgeList);
    }

    let mut children: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut parent_of: BTreeMap<&str, &str> = BTreeMap::new();
    let mut all_ids: BTreeSet<&str> = BTreeSet::new();
    all_ids.insert(root);
    for (parent, child) in edges {
        all_ids.insert(parent);
        all_ids.insert(child);
        if child == root {
            return Err(TaxonomyError::RootHasParent(child.clone()));
        }
        if let Some(previous) = parent_of.insert(child, parent) {
            if previous != parent {
                return Err(TaxonomyError::TwoParents(child.clone()));
            }
        }
        children.entry(parent).or_default().insert(child);
    }

    for id in &all_ids {
        match labels.get(*id) {
            None => return Err(TaxonomyError::MissingLabel(id.to_string())),
            Some(text) if tokenize(text).is_empty() => {
                return Err(TaxonomyError::EmptyLabel(id.to_string()))
            }
            Some(_) => {}
        }
    }

    // Breadth-first levels; a cycle keeps some node unreachable, and a
    // back-edge to a visited node was already rejected as a second parent.
    let mut level_of: BTreeMap<&str, usize> = BTreeMap::new();
    let mut queue = VecDeque::from([root]);
    level_of.insert(root, 0);
    while let Some(id) = queue.pop_front() {
        let level = level_of[id];
        for child in children.get(id).into_iter().flatten() {
            if level_of.contains_key(child) {
                return Err(TaxonomyError::Cycle(child.to_string()));
            }
            level_of.insert(child, level + 1);
            queue.push_back(child);
        }
    }
    for id in &all_ids {
        if !level_of.contains_key(*id) {
            // Distinguish a proper cycle (the node is an ancestor of itself)
            // from a node merely dangling off the reachable tree.
            let mut cursor = *id;
            let mut hops = 0;
            while let Some(p) = parent_of.get(cursor) {
                cursor = p;
                hops += 1;
                if cursor == *id || hops > all_ids.len() {
                    return Err(TaxonomyError::Cycle(id.to_string()));
                }
            }
            return Err(TaxonomyError::Unreachable(id.to_string()));
        }
    }

    let depth = *level_of.values().max().expect("non-empty taxonomy");
    for id in &all_ids {
        let is_leaf = !children.contains_key(*id);
        if is_leaf && level_of[*id] != depth {
            return Err(TaxonomyError::NonUniformDepth(
                id.to_string(),
                level_of[*id],
                depth,
            ));
        }
    }

    let mut levels: Vec<Vec<NodeId>> = vec![Vec::new(); depth + 1];
    let mut nodes = BTreeMap::new();
    for id in &all_ids {
        let level = level_of[*id];
        levels[level].push(id.to_string());
        nodes.insert(
            id.to_string(),
            Node {
                label: labels[*id].clone(),
                parent: parent_of.get(*id).map(|p| p.to_string()),
                level,
            },
        );
    }
    // BTreeSet iteration already yields lexicographic order per level.

    Ok(Taxonomy {
        root: root.to_string(),
        nodes,
        levels,
    })
}

impl Taxonomy {
    pub fn root(&self) -> &NodeId {
        &self.root
    }

    /// Number of classification levels, excluding the root level.
    pub fn level_count(&self) -> usize {
        self.levels.len() - 1
    }

    /// Total number of category nodes, excluding the root.
    pub fn category_count(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn contains(&self, id: &str) -> bool {
        self.nodes.contains_key(id)
    }

    /// Level of a node: 0 for the root, 1..=L otherwise.
    pub fn level_of(&self, id: &str) -> Option<usize> {
        self.nodes.get(id).map(|n| n.level)
    }

    /// Label text of a node.
    pub fn label(&self, id: &str) -> Option<&str> {
        self.nodes.get(id).map(|n| n.label.as_str())
    }

    pub fn parent(&self, id: &str) -> Option<&NodeId> {
        self.nodes.get(id).and_then(|n| n.parent.as_ref())
    }

    /// Ordered category ids at a classification level (1-based).
    ///
    /// The lexicographic order returned here is the class-index mapping of
    /// every classifier output at that level; it is stable across calls and
    /// across save/load of the taxonomy file.
    pub fn categories_at(&self, level: usize) -> Result<&[NodeId], TaxonomyError> {
        if level < 1 || level > self.level_count() {
            return Err(TaxonomyError::LevelOutOfRange(level, self.level_count()));
        }
        Ok(&self.levels[level])
    }

    /// Number of categories at a level.
    pub fn categories_count_at(&self, level: usize) -> Result<usize, TaxonomyError> {
        Ok(self.categories_at(level)?.len())
    }

    /// Class index of `id` within its level's ordered category list.
    pub fn class_index(&self, id: &str) -> Option<usize> {
        let level = self.level_of(id)?;
        if level == 0 {
            return None;
        }
        self.levels[level].iter().position(|c| c == id)
    }

    /// Check that `path` is well-formed (length L, one node per level) and
    /// report whether every consecutive pair is joined by a taxonomy edge.
    pub fn validate_path(&self, path: &LabelPath) -> Result<bool, TaxonomyError> {
        let expected = self.level_count();
        if path.len() != expected {
            return Err(TaxonomyError::PathLength {
                got: path.len(),
                expected,
            });
        }
        for (position, id) in path.0.iter().enumerate() {
            if self.level_of(id) != Some(position + 1) {
                return Err(TaxonomyError::PathLevelMismatch(id.clone(), position + 1));
            }
        }
        let mut parent: &NodeId = &self.root;
        for id in &path.0 {
            if self.parent(id) != Some(parent) {
                return Ok(false);
            }
            parent = id;
        }
        Ok(true)
    }

    /// Serialize to the line-delimited taxonomy file format.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<(), TaxonomyError> {
        for level in &self.levels {
            for id in level {
                let node = &self.nodes[id];
                let record = TaxonomyRecord {
                    id: id.clone(),
                    label: node.label.clone(),
                    parent: node.parent.clone(),
                };
                serde_json::to_writer(&mut out, &record)
                    .map_err(|e| std::io::Error::other(e.to_string()))?;
                out.write_all(b"\n")?;
            }
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<(), TaxonomyError> {
        let file = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(file))
    }

    /// Read the line-delimited taxonomy file format.
    pub fn read_from<R: BufRead>(reader: R) -> Result<Taxonomy, TaxonomyError> {
        let mut edges = Vec::new();
        let mut labels = BTreeMap::new();
        let mut root = None;
        for (index, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: TaxonomyRecord =
                serde_json::from_str(&line).map_err(|e| TaxonomyError::Parse {
                    line: index + 1,
                    message: e.to_string(),
                })?;
            labels.insert(record.id.clone(), record.label);
            match record.parent {
                Some(parent) => edges.push((parent, record.id)),
                None => {
                    if let Some(previous) = root.replace(record.id.clone()) {
                        return Err(TaxonomyError::Parse {
                            line: index + 1,
                            message: format!(
                                "second root record {} (first was {previous})",
                                record.id
                            ),
                        });
                    }
                }
            }
        }
        let root = root.ok_or(TaxonomyError::Parse {
            line: 0,
            message: "no root record (parent: null) found".into(),
        })?;
        build_taxonomy(&edges, &labels, &root)
    }

    pub fn load(path: &Path) -> Result<Taxonomy, TaxonomyError> {
        let file = std::fs::File::open(path)?;
        Taxonomy::read_from(std::io::BufReader::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels_for(ids: &[&str]) -> BTreeMap<NodeId, String> {
        ids.iter()
            .map(|id| (id.to_string(), format!("label {id}")))
            .collect()
    }

    fn small_tree() -> Taxonomy {
        let edges = vec![
            ("root".into(), "A".into()),
            ("root".into(), "B".into()),
            ("A".into(), "A1".into()),
            ("A".into(), "A2".into()),
            ("B".into(), "B1".into()),
        ];
        let labels = labels_for(&["root", "A", "B", "A1", "A2", "B1"]);
        build_taxonomy(&edges, &labels, "root").unwrap()
    }

    #[test]
    fn small_tree_levels_and_counts() {
        let tax = small_tree();
        assert_eq!(tax.level_count(), 2);
        assert_eq!(tax.categories_count_at(1).unwrap(), 2);
        assert_eq!(tax.categories_count_at(2).unwrap(), 3);
        assert_eq!(tax.level_of("root"), Some(0));
        assert_eq!(tax.level_of("A1"), Some(2));
    }

    #[test]
    fn categories_ordered_lexicographically() {
        let tax = small_tree();
        assert_eq!(tax.categories_at(2).unwrap(), ["A1", "A2", "B1"]);
        assert_eq!(tax.categories_at(1).unwrap(), ["A", "B"]);
        assert!(matches!(
            tax.categories_at(0),
            Err(TaxonomyError::LevelOutOfRange(0, 2))
        ));
        assert!(tax.categories_at(3).is_err());
    }

    #[test]
    fn class_index_follows_category_order() {
        let tax = small_tree();
        assert_eq!(tax.class_index("A1"), Some(0));
        assert_eq!(tax.class_index("B1"), Some(2));
        assert_eq!(tax.class_index("root"), None);
    }

    /// A tree with the same per-level category counts as a three-level
    /// encyclopedia-style taxonomy: 9 / 70 / 219.
    #[test]
    fn wide_three_level_tree() {
        let mut edges = Vec::new();
        let mut ids = vec!["root".to_string()];
        let mut l1 = Vec::new();
        for i in 0..9 {
            let id = format!("a{i:02}");
            edges.push(("root".to_string(), id.clone()));
            l1.push(id.clone());
            ids.push(id);
        }
        // 70 = 7 parents with 8 children + 2 parents with 7.
        let mut l2 = Vec::new();
        for (i, parent) in l1.iter().enumerate() {
            let n = if i < 7 { 8 } else { 7 };
            for j in 0..n {
                let id = format!("b{i:02}_{j:02}");
                edges.push((parent.clone(), id.clone()));
                l2.push(id.clone());
                ids.push(id);
            }
        }
        assert_eq!(l2.len(), 70);
        // 219 = 9 parents with 4 children + 61 parents with 3.
        let mut count_l3 = 0;
        for (i, parent) in l2.iter().enumerate() {
            let n = if i < 9 { 4 } else { 3 };
            for j in 0..n {
                let id = format!("c{i:02}_{j:02}");
                edges.push((parent.clone(), id.clone()));
                ids.push(id);
                count_l3 += 1;
            }
        }
        assert_eq!(count_l3, 219);

        let id_refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        let tax = build_taxonomy(&edges, &labels_for(&id_refs), "root").unwrap();
        assert_eq!(tax.level_count(), 3);
        assert_eq!(tax.categories_count_at(1).unwrap(), 9);
        assert_eq!(tax.categories_count_at(2).unwrap(), 70);
        assert_eq!(tax.categories_count_at(3).unwrap(), 219);
        assert_eq!(tax.category_count(), 9 + 70 + 219);
    }

    #[test]
    fn cycle_is_rejected() {
        let edges = vec![("root".into(), "A".into()), ("A".into(), "root".into())];
        let labels = labels_for(&["root", "A"]);
        assert!(matches!(
            build_taxonomy(&edges, &labels, "root"),
            Err(TaxonomyError::RootHasParent(_))
        ));

        // A cycle not involving the root.
        let edges = vec![
            ("root".into(), "A".into()),
            ("B".into(), "C".into()),
            ("C".into(), "B".into()),
        ];
        let labels = labels_for(&["root", "A", "B", "C"]);
        assert!(matches!(
            build_taxonomy(&edges, &labels, "root"),
            Err(TaxonomyError::Cycle(_))
        ));
    }

    #[test]
    fn two_parents_rejected() {
        let edges = vec![
            ("root".into(), "A".into()),
            ("root".into(), "B".into()),
            ("A".into(), "X".into()),
            ("B".into(), "X".into()),
        ];
        let labels = labels_for(&["root", "A", "B", "X"]);
        assert!(matches!(
            build_taxonomy(&edges, &labels, "root"),
            Err(TaxonomyError::TwoParents(id)) if id == "X"
        ));
    }

    #[test]
    fn non_uniform_depth_rejected() {
        let edges = vec![
            ("root".into(), "A".into()),
            ("root".into(), "B".into()),
            ("A".into(), "A1".into()),
        ];
        let labels = labels_for(&["root", "A", "B", "A1"]);
        assert!(matches!(
            build_taxonomy(&edges, &labels, "root"),
            Err(TaxonomyError::NonUniformDepth(id, 1, 2)) if id == "B"
        ));
    }

    #[test]
    fn unreachable_node_rejected() {
        let edges = vec![("root".into(), "A".into()), ("Z".into(), "Y".into())];
        let labels = labels_for(&["root", "A", "Z", "Y"]);
        assert!(matches!(
            build_taxonomy(&edges, &labels, "root"),
            Err(TaxonomyError::Unreachable(_))
        ));
    }

    #[test]
    fn missing_and_empty_labels_rejected() {
        let edges: Vec<(NodeId, NodeId)> = vec![("root".into(), "A".into())];
        let mut labels = labels_for(&["root"]);
        assert!(matches!(
            build_taxonomy(&edges, &labels, "root"),
            Err(TaxonomyError::MissingLabel(id)) if id == "A"
        ));
        labels.insert("A".into(), "!!!".into());
        assert!(matches!(
            build_taxonomy(&edges, &labels, "root"),
            Err(TaxonomyError::EmptyLabel(id)) if id == "A"
        ));
    }

    #[test]
    fn validate_path_cases() {
        let tax = small_tree();
        let consistent = LabelPath(vec!["A".into(), "A1".into()]);
        let crossed = LabelPath(vec!["A".into(), "B1".into()]);
        let short = LabelPath(vec!["A".into()]);
        assert!(tax.validate_path(&consistent).unwrap());
        assert!(!tax.validate_path(&crossed).unwrap());
        assert!(matches!(
            tax.validate_path(&short),
            Err(TaxonomyError::PathLength { got: 1, expected: 2 })
        ));
        let wrong_level = LabelPath(vec!["A1".into(), "A".into()]);
        assert!(tax.validate_path(&wrong_level).is_err());
    }

    #[test]
    fn level_sizes_sum_to_category_count() {
        let tax = small_tree();
        let total: usize = (1..=tax.level_count())
            .map(|l| tax.categories_count_at(l).unwrap())
            .sum();
        assert_eq!(total, tax.category_count());
    }

    #[test]
    fn file_round_trip_is_exact() {
        let tax = small_tree();
        let mut buffer = Vec::new();
        tax.write_to(&mut buffer).unwrap();
        let reloaded = Taxonomy::read_from(buffer.as_slice()).unwrap();
        assert_eq!(tax, reloaded);
        // Bit-identical ordering after the round trip.
        assert_eq!(
            tax.categories_at(2).unwrap(),
            reloaded.categories_at(2).unwrap()
        );
        // Canonical bytes: writing the reloaded taxonomy reproduces the file.
        let mut second = Vec::new();
        reloaded.write_to(&mut second).unwrap();
        assert_eq!(buffer, second);
    }

    #[test]
    fn duplicate_edges_are_tolerated() {
        let edges = vec![
            ("root".into(), "A".into()),
            ("root".into(), "A".into()),
            ("root".into(), "B".into()),
        ];
        let labels = labels_for(&["root", "A", "B"]);
        let tax = build_taxonomy(&edges, &labels, "root").unwrap();
        assert_eq!(tax.categories_at(1).unwrap(), ["A", "B"]);
    }
}
