//! Hash-consed boolean circuits over bounds variables.

use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

impl NodeId {
    pub const FALSE: NodeId = NodeId(0);
    pub const TRUE: NodeId = NodeId(1);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Const(bool),
    /// A bounds variable.
    Var(u32),
    Not(NodeId),
    /// Operands sorted and deduplicated, at least two.
    And(Vec<NodeId>),
    Or(Vec<NodeId>),
}

/// A DAG of gates. Identical subcircuits share one node, and constants are
/// folded as gates are built, so a node's operands never include constants.
#[derive(Debug, Clone)]
pub struct Circuit {
    nodes: Vec<Node>,
    table: HashMap<Node, NodeId>,
    var_nodes: Vec<NodeId>,
}

impl Circuit {
    pub fn new(num_vars: u32) -> Self {
        let mut c = Circuit {
            nodes: Vec::new(),
            table: HashMap::new(),
            var_nodes: Vec::with_capacity(num_vars as usize),
        };
        c.intern(Node::Const(false));
        c.intern(Node::Const(true));
        for v in 0..num_vars {
            let id = c.intern(Node::Var(v));
            c.var_nodes.push(id);
        }
        c
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn num_vars(&self) -> u32 {
        self.var_nodes.len() as u32
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    fn intern(&mut self, node: Node) -> NodeId {
        if let Some(&id) = self.table.get(&node) {
            return id;
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(node.clone());
        self.table.insert(node, id);
        id
    }

    pub fn constant(&self, value: bool) -> NodeId {
        if value {
            NodeId::TRUE
        } else {
            NodeId::FALSE
        }
    }

    pub fn var(&self, v: u32) -> NodeId {
        self.var_nodes[v as usize]
    }

    pub fn not(&mut self, a: NodeId) -> NodeId {
        match self.nodes[a.index()] {
            Node::Const(b) => self.constant(!b),
            Node::Not(inner) => inner,
            _ => self.intern(Node::Not(a)),
        }
    }

    fn gate(&mut self, is_and: bool, operands: impl IntoIterator<Item = NodeId>) -> NodeId {
        let (absorbing, neutral) = if is_and {
            (NodeId::FALSE, NodeId::TRUE)
        } else {
            (NodeId::TRUE, NodeId::FALSE)
        };
        let mut ops: Vec<NodeId> = Vec::new();
        for op in operands {
            if op == absorbing {
                return absorbing;
            }
            if op != neutral {
                ops.push(op);
            }
        }
        ops.sort_unstable();
        ops.dedup();
        // x together with !x
        for &op in &ops {
            if let Node::Not(inner) = self.nodes[op.index()] {
                if ops.binary_search(&inner).is_ok() {
                    return absorbing;
                }
            }
        }
        match ops.len() {
            0 => neutral,
            1 => ops[0],
            _ => self.intern(if is_and { Node::And(ops) } else { Node::Or(ops) }),
        }
    }

    pub fn and(&mut self, operands: impl IntoIterator<Item = NodeId>) -> NodeId {
        self.gate(true, operands)
    }

    pub fn or(&mut self, operands: impl IntoIterator<Item = NodeId>) -> NodeId {
        self.gate(false, operands)
    }

    pub fn and2(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.and([a, b])
    }

    pub fn or2(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.or([a, b])
    }

    pub fn implies(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let na = self.not(a);
        self.or2(na, b)
    }

    pub fn iff(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let ab = self.implies(a, b);
        let ba = self.implies(b, a);
        self.and2(ab, ba)
    }

    /// At most one operand true, by a sequential counter: `seen_i` holds when
    /// one of the first `i` operands is true.
    pub fn at_most_one(&mut self, operands: &[NodeId]) -> NodeId {
        let mut clauses = Vec::new();
        let mut seen = NodeId::FALSE;
        for &x in operands {
            let both = self.and2(seen, x);
            clauses.push(self.not(both));
            seen = self.or2(seen, x);
        }
        self.and(clauses)
    }

    pub fn exactly_one(&mut self, operands: &[NodeId]) -> NodeId {
        let amo = self.at_most_one(operands);
        let alo = self.or(operands.iter().copied());
        self.and2(amo, alo)
    }

    /// Evaluates a node under a full assignment of the bounds variables.
    pub fn eval(&self, root: NodeId, assignment: &[bool]) -> bool {
        let mut memo: HashMap<NodeId, bool> = HashMap::new();
        self.eval_memo(root, assignment, &mut memo)
    }

    fn eval_memo(&self, id: NodeId, assignment: &[bool], memo: &mut HashMap<NodeId, bool>) -> bool {
        if let Some(&v) = memo.get(&id) {
            return v;
        }
        let v = match &self.nodes[id.index()] {
            Node::Const(b) => *b,
            Node::Var(v) => assignment[*v as usize],
            Node::Not(a) => !self.eval_memo(*a, assignment, memo),
            Node::And(ops) => ops.iter().all(|&o| self.eval_memo(o, assignment, memo)),
            Node::Or(ops) => ops.iter().any(|&o| self.eval_memo(o, assignment, memo)),
        };
        memo.insert(id, v);
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_fold() {
        let mut c = Circuit::new(2);
        let a = c.var(0);
        assert_eq!(c.and2(a, NodeId::FALSE), NodeId::FALSE);
        assert_eq!(c.and2(a, NodeId::TRUE), a);
        assert_eq!(c.or2(a, NodeId::TRUE), NodeId::TRUE);
        let na = c.not(a);
        assert_eq!(c.not(na), a);
        assert_eq!(c.and2(a, na), NodeId::FALSE);
        assert_eq!(c.or2(na, a), NodeId::TRUE);
        assert_eq!(c.and(std::iter::empty()), NodeId::TRUE);
    }

    #[test]
    fn structural_hashing() {
        let mut c = Circuit::new(3);
        let (a, b) = (c.var(0), c.var(1));
        let x = c.and2(a, b);
        let y = c.and2(b, a);
        assert_eq!(x, y);
        let before = c.len();
        let _ = c.and([a, b, a]);
        assert_eq!(c.len(), before);
    }

    #[test]
    fn cardinality_gates_match_counting() {
        let mut c = Circuit::new(4);
        let vars: Vec<NodeId> = (0..4).map(|v| c.var(v)).collect();
        let amo = c.at_most_one(&vars);
        let one = c.exactly_one(&vars);
        for bits in 0u32..16 {
            let assignment: Vec<bool> = (0..4).map(|i| bits >> i & 1 == 1).collect();
            let n = bits.count_ones();
            assert_eq!(c.eval(amo, &assignment), n <= 1);
            assert_eq!(c.eval(one, &assignment), n == 1);
        }
    }
}
