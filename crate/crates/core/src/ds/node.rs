//! Random-variable nodes of the delayed-sampling graph.

use std::fmt;
use std::sync::atomic::{AtomicI64, AtomicU64, Ordering};
use std::sync::{Arc, Mutex, MutexGuard, Weak};

use crate::dist::Distribution;
use crate::ds::conjugacy::Conditional;
use crate::value::Value;

static NEXT_ID: AtomicU64 = AtomicU64::new(0);

/// What a node's values look like; decides which conjugacies apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Gaussian,
    MvGaussian,
    Beta,
    Bernoulli,
}

impl Family {
    pub fn of(d: &Distribution) -> Option<Family> {
        match d {
            Distribution::Gaussian(..) => Some(Family::Gaussian),
            Distribution::MvGaussian(..) => Some(Family::MvGaussian),
            Distribution::Beta(..) => Some(Family::Beta),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Status {
    Initialized { parent: NodeRef, cond: Conditional },
    /// `child` is the unique marginalized child, with its conditional.
    Marginalized { marginal: Distribution, child: Option<(NodeRef, Conditional)> },
    Realized(Value),
}

pub(crate) struct Cell {
    pub status: Status,
    /// Naive variant only: the parent a marginalized node was marginalized
    /// against, so that realizing it can condition that parent at once.
    pub up: Option<Weak<Node>>,
}

pub struct Node {
    pub id: u64,
    pub family: Family,
    live: Arc<AtomicI64>,
    cell: Mutex<Cell>,
}

/// Shared handle on a node.
#[derive(Clone)]
pub struct NodeRef(pub Arc<Node>);

impl NodeRef {
    pub fn new(family: Family, status: Status, live: &Arc<AtomicI64>) -> NodeRef {
        live.fetch_add(1, Ordering::Relaxed);
        NodeRef(Arc::new(Node {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            family,
            live: live.clone(),
            cell: Mutex::new(Cell { status, up: None }),
        }))
    }

    pub(crate) fn lock(&self) -> MutexGuard<'_, Cell> {
        self.0.cell.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn status(&self) -> Status {
        self.lock().status.clone()
    }

    pub fn is_realized(&self) -> bool {
        matches!(self.lock().status, Status::Realized(_))
    }

    pub fn realized_value(&self) -> Option<Value> {
        match &self.lock().status {
            Status::Realized(v) => Some(v.clone()),
            _ => None,
        }
    }

    pub fn id(&self) -> u64 {
        self.0.id
    }

    pub fn family(&self) -> Family {
        self.0.family
    }

    pub fn ptr_eq(&self, other: &NodeRef) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub(crate) fn downgrade(&self) -> Weak<Node> {
        Arc::downgrade(&self.0)
    }

    pub(crate) fn live_counter(&self) -> &Arc<AtomicI64> {
        &self.0.live
    }
}

impl fmt::Debug for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "X{}", self.0.id)
    }
}

impl PartialEq for NodeRef {
    fn eq(&self, other: &NodeRef) -> bool {
        self.ptr_eq(other)
    }
}

// Strong links the node owns; dropped iteratively so that long chains do
// not recurse.
fn take_links(cell: &mut Cell) -> Option<NodeRef> {
    let status = std::mem::replace(&mut cell.status, Status::Realized(Value::Unit));
    match status {
        Status::Initialized { parent, .. } => Some(parent),
        Status::Marginalized { child: Some((c, _)), .. } => Some(c),
        _ => None,
    }
}

impl Drop for Node {
    fn drop(&mut self) {
        self.live.fetch_sub(1, Ordering::Relaxed);
        let cell = self.cell.get_mut().unwrap_or_else(|e| e.into_inner());
        let mut next = take_links(cell);
        while let Some(n) = next {
            match Arc::try_unwrap(n.0) {
                Ok(mut node) => {
                    let cell = node.cell.get_mut().unwrap_or_else(|e| e.into_inner());
                    next = take_links(cell);
                }
                Err(_) => break,
            }
        }
    }
}
