//! Basic feature trees (mandatory / optional children, or- and xor-groups,
//! requires / excludes cross-tree constraints) and their CNF encoding.
//!
//! Text format, one feature per line, nesting by indentation:
//!
//! ```text
//! Phone
//!   m Calls
//!   o GPS
//!   g[1,1] Basic
//!   g[1,1] HighRes
//!   o Media
//!     g[1,*] Camera
//!     g[1,*] MP3
//! requires: Camera HighRes
//! excludes: GPS Basic
//! ```
//!
//! The unprefixed first line is the root. `m` and `o` mark mandatory and
//! optional children. Consecutive siblings carrying the same group token
//! form one group: `g[1,1]` is an xor-group, `g[1,*]` an or-group. Append
//! `:label` (e.g. `g[1,1]:a`) to separate adjacent groups of the same kind.
//! `#` starts a comment.

use std::collections::HashMap;

use super::FeatureModel;
use crate::{Error, Result};

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    /// At least one member when the parent is selected.
    Or,
    /// Exactly one member when the parent is selected.
    Xor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Edge {
    Root,
    Mandatory,
    Optional,
    Group(usize),
}

#[derive(Debug, Clone)]
struct Node {
    name: String,
    parent: Option<NodeId>,
    edge: Edge,
}

#[derive(Debug, Clone)]
struct Group {
    kind: GroupKind,
    members: Vec<NodeId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CrossTree {
    Requires(NodeId, NodeId),
    Excludes(NodeId, NodeId),
}

/// A feature tree. Built through the methods below, which keep it connected
/// and acyclic with unique names; node ids are assigned in insertion order
/// starting with the root at 0.
#[derive(Debug, Clone)]
pub struct FeatureTree {
    nodes: Vec<Node>,
    groups: Vec<Group>,
    constraints: Vec<CrossTree>,
    by_name: HashMap<String, NodeId>,
}

impl FeatureTree {
    pub fn new(root: &str) -> Result<Self> {
        let mut tree = FeatureTree {
            nodes: Vec::new(),
            groups: Vec::new(),
            constraints: Vec::new(),
            by_name: HashMap::new(),
        };
        tree.push(root, None, Edge::Root)?;
        Ok(tree)
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn name(&self, id: NodeId) -> &str {
        &self.nodes[id].name
    }

    pub fn id(&self, name: &str) -> Option<NodeId> {
        self.by_name.get(name).copied()
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id].parent
    }

    fn push(&mut self, name: &str, parent: Option<NodeId>, edge: Edge) -> Result<NodeId> {
        let name = name.trim();
        if name.is_empty() {
            return Err(Error::InvalidModel("empty feature name".into()));
        }
        if self.by_name.contains_key(name) {
            return Err(Error::InvalidModel(format!("duplicate feature name {name:?}")));
        }
        if let Some(p) = parent {
            if p >= self.nodes.len() {
                return Err(Error::InvalidModel(format!("unknown parent node {p}")));
            }
        }
        let id = self.nodes.len();
        self.nodes.push(Node {
            name: name.to_string(),
            parent,
            edge,
        });
        self.by_name.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn add_mandatory(&mut self, parent: NodeId, name: &str) -> Result<NodeId> {
        self.push(name, Some(parent), Edge::Mandatory)
    }

    pub fn add_optional(&mut self, parent: NodeId, name: &str) -> Result<NodeId> {
        self.push(name, Some(parent), Edge::Optional)
    }

    /// Adds a group of at least one new child under `parent`.
    pub fn add_group(&mut self, parent: NodeId, kind: GroupKind, names: &[&str]) -> Result<Vec<NodeId>> {
        if names.is_empty() {
            return Err(Error::InvalidModel("empty feature group".into()));
        }
        let group = self.groups.len();
        self.groups.push(Group {
            kind,
            members: Vec::new(),
        });
        let mut ids = Vec::with_capacity(names.len());
        for name in names {
            let id = self.push(name, Some(parent), Edge::Group(group))?;
            self.groups[group].members.push(id);
            ids.push(id);
        }
        Ok(ids)
    }

    fn add_group_member(&mut self, parent: NodeId, group: usize, name: &str) -> Result<NodeId> {
        let id = self.push(name, Some(parent), Edge::Group(group))?;
        self.groups[group].members.push(id);
        Ok(id)
    }

    pub fn requires(&mut self, a: NodeId, b: NodeId) -> Result<()> {
        self.check_pair(a, b)?;
        self.constraints.push(CrossTree::Requires(a, b));
        Ok(())
    }

    pub fn excludes(&mut self, a: NodeId, b: NodeId) -> Result<()> {
        self.check_pair(a, b)?;
        self.constraints.push(CrossTree::Excludes(a, b));
        Ok(())
    }

    fn check_pair(&self, a: NodeId, b: NodeId) -> Result<()> {
        if a >= self.nodes.len() || b >= self.nodes.len() {
            return Err(Error::InvalidModel("cross-tree constraint names an unknown node".into()));
        }
        if a == b {
            return Err(Error::InvalidModel(format!(
                "cross-tree constraint relates {:?} to itself",
                self.nodes[a].name
            )));
        }
        Ok(())
    }

    /// Checks a configuration (indexed by node id) against the tree
    /// semantics directly, without going through CNF.
    pub fn accepts(&self, selected: &[bool]) -> bool {
        if selected.len() != self.nodes.len() || !selected[0] {
            return false;
        }
        for (id, node) in self.nodes.iter().enumerate() {
            if let Some(p) = node.parent {
                if selected[id] && !selected[p] {
                    return false;
                }
                if node.edge == Edge::Mandatory && selected[p] && !selected[id] {
                    return false;
                }
            }
        }
        for g in &self.groups {
            let parent = self.nodes[g.members[0]].parent.expect("group members have parents");
            if !selected[parent] {
                continue;
            }
            let count = g.members.iter().filter(|&&m| selected[m]).count();
            let ok = match g.kind {
                GroupKind::Or => count >= 1,
                GroupKind::Xor => count == 1,
            };
            if !ok {
                return false;
            }
        }
        self.constraints.iter().all(|c| match *c {
            CrossTree::Requires(a, b) => !selected[a] || selected[b],
            CrossTree::Excludes(a, b) => !(selected[a] && selected[b]),
        })
    }
}

/// Encodes the tree as CNF. Feature `i + 1` is node `i`.
///
/// Root forced; child implies parent; parent implies each mandatory child;
/// parent implies the disjunction of each group; xor-group members are
/// pairwise exclusive; requires / excludes become two-literal clauses.
pub fn compile_tree(tree: &FeatureTree) -> FeatureModel {
    let var = |id: NodeId| id as i32 + 1;
    let mut clauses = vec![vec![var(0)]];
    for (id, node) in tree.nodes.iter().enumerate() {
        if let Some(p) = node.parent {
            clauses.push(vec![-var(id), var(p)]);
            if node.edge == Edge::Mandatory {
                clauses.push(vec![-var(p), var(id)]);
            }
        }
    }
    for g in &tree.groups {
        let parent = tree.nodes[g.members[0]].parent.expect("group members have parents");
        let mut any = vec![-var(parent)];
        any.extend(g.members.iter().map(|&m| var(m)));
        clauses.push(any);
        if g.kind == GroupKind::Xor {
            for (i, &a) in g.members.iter().enumerate() {
                for &b in &g.members[i + 1..] {
                    clauses.push(vec![-var(a), -var(b)]);
                }
            }
        }
    }
    for c in &tree.constraints {
        clauses.push(match *c {
            CrossTree::Requires(a, b) => vec![-var(a), var(b)],
            CrossTree::Excludes(a, b) => vec![-var(a), -var(b)],
        });
    }
    let names = tree.nodes.iter().map(|n| n.name.clone()).collect();
    FeatureModel::new(names, clauses).expect("tree encodings satisfy the model invariants")
}

/// Parses the indented feature-tree text format described in the module
/// docs.
pub fn parse_tree(text: &str) -> Result<FeatureTree> {
    let mut tree: Option<FeatureTree> = None;
    // (indent, node) for the current ancestor chain.
    let mut stack: Vec<(usize, NodeId)> = Vec::new();
    // Last group token seen per parent, with its group index, so that
    // consecutive siblings with the same token share a group.
    let mut open_group: HashMap<NodeId, (String, usize)> = HashMap::new();
    let mut in_trailer = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let trimmed = content.trim();
        let constraint = trimmed
            .strip_prefix("requires:")
            .map(|rest| (true, rest))
            .or_else(|| trimmed.strip_prefix("excludes:").map(|rest| (false, rest)));
        if let Some((is_requires, rest)) = constraint {
            in_trailer = true;
            let t = tree
                .as_mut()
                .ok_or_else(|| Error::parse(line_no, "constraint before root feature"))?;
            let names: Vec<&str> = rest.split_whitespace().collect();
            if names.len() != 2 {
                return Err(Error::parse(line_no, "constraint needs exactly two feature names"));
            }
            let lookup = |n: &str| {
                t.id(n)
                    .ok_or_else(|| Error::parse(line_no, format!("unknown feature {n:?}")))
            };
            let (a, b) = (lookup(names[0])?, lookup(names[1])?);
            let res = if is_requires { t.requires(a, b) } else { t.excludes(a, b) };
            res.map_err(|e| Error::parse(line_no, e.to_string()))?;
            continue;
        }
        if in_trailer {
            return Err(Error::parse(line_no, "feature line after constraint lines"));
        }
        let indent = content.len() - content.trim_start().len();
        let Some(t) = tree.as_mut() else {
            if indent != 0 || trimmed.split_whitespace().count() != 1 {
                return Err(Error::parse(line_no, "first line must be the bare root feature name"));
            }
            let t = FeatureTree::new(trimmed).map_err(|e| Error::parse(line_no, e.to_string()))?;
            tree = Some(t);
            stack.push((0, 0));
            continue;
        };
        let mut toks = trimmed.splitn(2, char::is_whitespace);
        let token = toks.next().unwrap_or("");
        let name = toks.next().map(str::trim).unwrap_or("");
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(Error::parse(line_no, "expected `<m|o|g[1,1]|g[1,*]> <name>`"));
        }
        while stack.last().is_some_and(|&(ind, _)| ind >= indent) {
            stack.pop();
        }
        let Some(&(_, parent)) = stack.last() else {
            return Err(Error::parse(line_no, "child must be indented below the root"));
        };
        let added = match token {
            "m" => t.add_mandatory(parent, name),
            "o" => t.add_optional(parent, name),
            tok if tok.starts_with("g[") => {
                let kind = match tok.split(':').next() {
                    Some("g[1,1]") => GroupKind::Xor,
                    Some("g[1,*]") => GroupKind::Or,
                    _ => {
                        return Err(Error::parse(line_no, format!("unknown group token {tok:?}")))
                    }
                };
                let group = match open_group.get(&parent) {
                    Some((last, g)) if last == tok => *g,
                    _ => {
                        let g = t.groups.len();
                        t.groups.push(Group {
                            kind,
                            members: Vec::new(),
                        });
                        g
                    }
                };
                let r = t.add_group_member(parent, group, name);
                if r.is_ok() {
                    open_group.insert(parent, (tok.to_string(), group));
                }
                r
            }
            other => return Err(Error::parse(line_no, format!("unknown prefix {other:?}"))),
        };
        let id = added.map_err(|e| Error::parse(line_no, e.to_string()))?;
        if !token.starts_with("g[") {
            open_group.remove(&parent);
        }
        stack.push((indent, id));
    }
    tree.ok_or_else(|| Error::parse(1, "empty feature tree"))
}
