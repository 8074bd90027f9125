//! Bottom-up algebraic rewriting.

use super::tree::{Func, GpNode};

fn is_const(n: &GpNode, v: f64) -> bool {
    matches!(n, GpNode::Constant(c) if *c == v)
}

/// Rewrites to a fixpoint: constant folding plus the identities
/// x+0, 0+x, x*1, 1*x, x*0, 0*x, x-0, x-x and x/1. Every rule agrees with
/// protected evaluation, and no rule adds nodes.
pub fn simplify(tree: &GpNode) -> GpNode {
    let mut current = tree.clone();
    loop {
        let next = rewrite(&current);
        if next == current {
            return next;
        }
        current = next;
    }
}

fn rewrite(node: &GpNode) -> GpNode {
    let GpNode::Function(f, children) = node else {
        return node.clone();
    };
    let children: Vec<GpNode> = children.iter().map(rewrite).collect();
    if children.iter().all(|c| matches!(c, GpNode::Constant(_))) {
        let folded = GpNode::Function(f.clone(), children);
        return GpNode::Constant(folded.eval(&[]));
    }
    if let [a, b] = children.as_slice() {
        let rewritten = match f {
            Func::Add if is_const(b, 0.0) => Some(a.clone()),
            Func::Add if is_const(a, 0.0) => Some(b.clone()),
            Func::Mul if is_const(b, 1.0) => Some(a.clone()),
            Func::Mul if is_const(a, 1.0) => Some(b.clone()),
            Func::Mul if is_const(a, 0.0) || is_const(b, 0.0) => Some(GpNode::Constant(0.0)),
            Func::Sub if is_const(b, 0.0) => Some(a.clone()),
            Func::Sub if a == b => Some(GpNode::Constant(0.0)),
            Func::Div if is_const(b, 1.0) => Some(a.clone()),
            _ => None,
        };
        if let Some(r) = rewritten {
            return r;
        }
    }
    GpNode::Function(f.clone(), children)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::FunctionSet;

    fn s(text: &str) -> String {
        simplify(&GpNode::parse(text, &FunctionSet::standard()).unwrap()).to_string()
    }

    #[test]
    fn rules() {
        assert_eq!(s("(+ x0 0.0)"), "x0");
        assert_eq!(s("(+ 0.0 x0)"), "x0");
        assert_eq!(s("(* (+ 1.0 2.0) x0)"), "(* 3.0 x0)");
        assert_eq!(s("(* x1 0.0)"), "0.0");
        assert_eq!(s("(- (sin x0) (sin x0))"), "0.0");
        assert_eq!(s("(/ (* 1.0 x0) (- 3.0 2.0))"), "x0");
        assert_eq!(s("(/ x0 0.0)"), "(/ x0 0.0)");
        assert_eq!(s("(+ x0 (* x1 (- x0 x0)))"), "x0");
    }
}
