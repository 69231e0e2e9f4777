use serde::{Deserialize, Serialize};

/// Maps global qubit indices back to `register[index]` names for printing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterLayout {
    regs: Vec<(String, usize, usize)>,
}

impl Default for RegisterLayout {
    fn default() -> Self {
        RegisterLayout {
            regs: vec![("q".into(), 0, usize::MAX)],
        }
    }
}

impl RegisterLayout {
    pub fn empty() -> Self {
        RegisterLayout { regs: Vec::new() }
    }

    /// Appends a register and returns its first global index.
    pub fn push(&mut self, name: &str, size: usize) -> usize {
        let offset = self.total();
        self.regs.push((name.to_string(), offset, size));
        offset
    }

    pub fn total(&self) -> usize {
        self.regs.last().map_or(0, |(_, o, s)| o.saturating_add(*s))
    }

    pub fn registers(&self) -> impl Iterator<Item = (&str, usize, usize)> {
        self.regs.iter().map(|(n, o, s)| (n.as_str(), *o, *s))
    }

    pub fn name(&self, q: usize) -> String {
        for (n, o, s) in &self.regs {
            if q >= *o && q - o < *s {
                return format!("{n}[{}]", q - o);
            }
        }
        format!("q[{q}]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_follow_registers() {
        let mut l = RegisterLayout::empty();
        assert_eq!(l.push("a", 2), 0);
        assert_eq!(l.push("b", 3), 2);
        assert_eq!(l.name(1), "a[1]");
        assert_eq!(l.name(4), "b[2]");
        assert_eq!(l.total(), 5);
        assert_eq!(RegisterLayout::default().name(7), "q[7]");
    }
}
