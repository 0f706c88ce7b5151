//! Ranked Safra trees and their bijection with ranked slices.
//!
//! A tree is flattened into a slice by a post-order traversal (children
//! before their parent). The inverse direction rebuilds the rank tree from
//! the ranking alone with a single right-to-left stack pass ([`unflatten`]).
//!
//! Labels are stored in reduced form: a state appears only at the deepest
//! node that holds it. The classical full label of a node is its subtree
//! set.
//!
//! Text rendering: `label:rank` followed by an optional parenthesised,
//! comma-separated child list, e.g. `{0}:1({1}:2,{2}:3)`.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::nba::StateSet;
use crate::slice::{write_set, Cursor, Rank, RankTree, RankedSlice};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SafraNode {
    pub label: StateSet,
    pub rank: Rank,
    pub children: Vec<SafraNode>,
}

impl SafraNode {
    pub fn leaf(label: StateSet, rank: Rank) -> Self {
        SafraNode {
            label,
            rank,
            children: Vec::new(),
        }
    }

    pub fn with_children(label: StateSet, rank: Rank, children: Vec<SafraNode>) -> Self {
        SafraNode {
            label,
            rank,
            children,
        }
    }

    fn count(&self) -> usize {
        1 + self.children.iter().map(SafraNode::count).sum::<usize>()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RankedSafraTree {
    root: SafraNode,
}

impl RankedSafraTree {
    pub fn new(root: SafraNode) -> Result<Self> {
        let tree = RankedSafraTree { root };
        tree.validate()?;
        Ok(tree)
    }

    pub fn root(&self) -> &SafraNode {
        &self.root
    }

    pub fn num_nodes(&self) -> usize {
        self.root.count()
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_nodes();
        let mut seen_states = HashSet::new();
        let mut seen_ranks = vec![false; n + 1];
        let mut stack = vec![&self.root];
        while let Some(node) = stack.pop() {
            if node.label.is_empty() {
                return Err(Error::InvalidTree("empty label".into()));
            }
            if let Some(q) = node.label.iter().find(|q| !seen_states.insert(**q)) {
                return Err(Error::InvalidTree(format!("state {q} labels two nodes")));
            }
            let r = node.rank as usize;
            if r == 0 || r > n || seen_ranks[r] {
                return Err(Error::InvalidTree(format!(
                    "ranks are not a bijection onto 1..={n}"
                )));
            }
            seen_ranks[r] = true;
            let mut prev: Option<Rank> = None;
            for child in &node.children {
                if child.rank <= node.rank {
                    return Err(Error::InvalidTree(format!(
                        "child rank {} not larger than parent rank {}",
                        child.rank, node.rank
                    )));
                }
                if prev.is_some_and(|p| p >= child.rank) {
                    return Err(Error::InvalidTree(format!(
                        "sibling rank {} not larger than its left sibling",
                        child.rank
                    )));
                }
                prev = Some(child.rank);
                stack.push(child);
            }
        }
        if self.root.rank != 1 {
            return Err(Error::InvalidTree("root must have rank 1".into()));
        }
        Ok(())
    }
}

/// Parent and left-subtree-boundary arrays of a rank tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeShape {
    pub parent: Vec<Option<usize>>,
    pub left_boundary: Vec<Option<usize>>,
    /// Main-loop iterations plus stack pops; at most `3n`.
    pub work: usize,
}

/// Computes parents and left subtree boundaries from a ranking in linear
/// time using a stack of pending ancestors.
///
/// Ranks need only be pairwise distinct with the minimum at the last
/// position; gaps are fine.
pub fn unflatten(ranks: &[Rank]) -> TreeShape {
    let n = ranks.len();
    let mut parent = vec![None; n];
    let mut left_boundary = vec![None; n];
    let mut stack: Vec<usize> = Vec::with_capacity(n);
    let mut work = 0;
    for i in (0..n).rev() {
        work += 1;
        while let Some(&top) = stack.last() {
            if ranks[i] >= ranks[top] {
                break;
            }
            left_boundary[top] = Some(i);
            stack.pop();
            work += 1;
        }
        parent[i] = stack.last().copied();
        stack.push(i);
    }
    // whatever remains has nothing smaller to its left
    work += stack.len();
    TreeShape {
        parent,
        left_boundary,
        work,
    }
}

/// Lists node labels in post-order; ranks are copied from the nodes.
pub fn safra_to_slice(tree: &RankedSafraTree) -> RankedSlice {
    fn visit(node: &SafraNode, sets: &mut Vec<StateSet>, ranks: &mut Vec<Rank>) {
        for child in &node.children {
            visit(child, sets, ranks);
        }
        sets.push(node.label.clone());
        ranks.push(node.rank);
    }
    let mut sets = Vec::new();
    let mut ranks = Vec::new();
    visit(&tree.root, &mut sets, &mut ranks);
    RankedSlice::from_parts_unchecked(sets, ranks)
}

/// The rank tree of a slice; siblings ordered by tuple position.
///
/// Fails only for the sink macrostate, which has no tree.
pub fn slice_to_safra(slice: &RankedSlice) -> Result<RankedSafraTree> {
    let n = slice.len();
    if n == 0 {
        return Err(Error::InvalidSlice("the sink has no Safra tree".into()));
    }
    let shape = unflatten(slice.ranks());
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, p) in shape.parent.iter().enumerate() {
        if let Some(p) = p {
            children[*p].push(i);
        }
    }
    fn build(i: usize, slice: &RankedSlice, children: &[Vec<usize>]) -> SafraNode {
        SafraNode {
            label: slice.sets()[i].clone(),
            rank: slice.ranks()[i],
            children: children[i]
                .iter()
                .map(|&c| build(c, slice, children))
                .collect(),
        }
    }
    Ok(RankedSafraTree {
        root: build(n - 1, slice, &children),
    })
}

impl fmt::Display for SafraNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_set(f, &self.label)?;
        write!(f, ":{}", self.rank)?;
        if !self.children.is_empty() {
            f.write_str("(")?;
            for (i, c) in self.children.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{c}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for RankedSafraTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

impl RankedSafraTree {
    /// Multi-line indented rendering, one node per line.
    pub fn pretty(&self) -> String {
        fn go(node: &SafraNode, depth: usize, out: &mut String) {
            out.push_str(&"  ".repeat(depth));
            write_set(out, &node.label).unwrap();
            out.push_str(&format!(":{}\n", node.rank));
            for c in &node.children {
                go(c, depth + 1, out);
            }
        }
        let mut out = String::new();
        go(&self.root, 0, &mut out);
        out
    }
}

fn parse_node(cur: &mut Cursor<'_>) -> std::result::Result<SafraNode, String> {
    let label = cur.set()?;
    cur.expect(':')?;
    let rank = cur.number()?;
    let mut children = Vec::new();
    if cur.eat('(') {
        loop {
            children.push(parse_node(cur)?);
            if cur.eat(')') {
                break;
            }
            cur.expect(',')?;
        }
    }
    Ok(SafraNode {
        label,
        rank,
        children,
    })
}

impl FromStr for RankedSafraTree {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut cur = Cursor::new(s);
        let root = parse_node(&mut cur).map_err(Error::InvalidTree)?;
        cur.finish().map_err(Error::InvalidTree)?;
        RankedSafraTree::new(root)
    }
}
