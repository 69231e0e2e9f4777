//! Recursive-descent parser from tokens to [`KernelAst`].

use std::collections::BTreeSet;

use super::ast::{AssignTarget, Expr, KernelAst, Modifier, Param, Stmt, StmtKind, TypeAnnotation};
use super::classify::{classify_call, CallClass, EXP_I_THETA};
use super::lexer::tokenize;
use super::token::{Token, TokenKind};
use super::ParseError;
use crate::ir::{BinOp, Gate, UnOp};

/// Parses every `def` in `source`. Names in `known_kernels` are treated as
/// callable kernels in addition to the kernels defined in the source.
/// Top-level lines other than definitions and decorators are skipped.
pub fn parse_module(source: &str, known_kernels: &BTreeSet<String>) -> Result<Vec<KernelAst>, ParseError> {
    let src = dedent(source);
    let toks = tokenize(&src)?;
    let mut kernels = known_kernels.clone();
    for w in toks.windows(2) {
        if w[0].is_keyword("def") && w[1].kind == TokenKind::Identifier {
            kernels.insert(w[1].text.clone());
        }
    }
    let mut p = Parser { toks: &toks, pos: 0, kernels };
    let mut out: Vec<KernelAst> = Vec::new();
    while !p.at_end() {
        let t = p.peek().clone();
        if t.is_keyword("def") {
            let k = p.kernel()?;
            if out.iter().any(|o| o.name == k.name) {
                return Err(ParseError::Syntax {
                    line: t.line,
                    column: t.column,
                    message: format!("kernel `{}` defined twice", k.name),
                });
            }
            out.push(k);
        } else {
            p.skip_statement();
        }
    }
    Ok(out)
}

/// Parses a source that must contain exactly one kernel.
pub fn parse_kernel(source: &str, known_kernels: &BTreeSet<String>) -> Result<KernelAst, ParseError> {
    let mut ks = parse_module(source, known_kernels)?;
    match ks.len() {
        0 => Err(ParseError::NoKernel),
        1 => Ok(ks.remove(0)),
        n => Err(ParseError::Syntax {
            line: 1,
            column: 1,
            message: format!("expected one kernel, found {n}"),
        }),
    }
}

/// Parses a single expression; newlines may be joined with a backslash.
pub fn parse_expression(source: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(source.trim())?;
    if toks.is_empty() {
        return Err(ParseError::Syntax {
            line: 1,
            column: 1,
            message: "empty expression".into(),
        });
    }
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        kernels: BTreeSet::new(),
    };
    let e = p.expr()?;
    if p.check_kind(TokenKind::Newline) {
        p.pos += 1;
    }
    if !p.at_end() {
        return p.err(format!("unexpected {} after expression", p.peek()));
    }
    Ok(e)
}

/// Strips the common leading indentation of all non-blank lines.
pub fn dedent(source: &str) -> String {
    let common = source
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.len() - l.trim_start_matches(' ').len())
        .min()
        .unwrap_or(0);
    if common == 0 {
        return source.to_string();
    }
    source
        .lines()
        .map(|l| if l.len() >= common { &l[common..] } else { l.trim_start() })
        .collect::<Vec<_>>()
        .join("\n")
}

struct Parser<'t> {
    toks: &'t [Token],
    pos: usize,
    kernels: BTreeSet<String>,
}

type PResult<T> = Result<T, ParseError>;

impl<'t> Parser<'t> {
    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn peek(&self) -> &'t Token {
        self.toks.get(self.pos).unwrap_or_else(|| self.toks.last().expect("non-empty token stream"))
    }

    fn next(&mut self) -> &'t Token {
        let t = self.peek();
        self.pos += 1;
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> PResult<T> {
        let (line, column) = if self.at_end() {
            self.toks.last().map_or((1, 1), |t| (t.line, t.column))
        } else {
            (self.peek().line, self.peek().column)
        };
        Err(ParseError::Syntax {
            line,
            column,
            message: message.into(),
        })
    }

    fn check_op(&self, op: &str) -> bool {
        !self.at_end() && self.peek().is_op(op)
    }

    fn check_kw(&self, kw: &str) -> bool {
        !self.at_end() && self.peek().is_keyword(kw)
    }

    fn check_kind(&self, kind: TokenKind) -> bool {
        !self.at_end() && self.peek().kind == kind
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if self.check_op(op) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, op: &str) -> PResult<()> {
        if self.eat_op(op) {
            Ok(())
        } else if self.at_end() {
            self.err(format!("expected `{op}`, found end of input"))
        } else {
            self.err(format!("expected `{op}`, found {}", self.peek()))
        }
    }

    fn expect_kind(&mut self, kind: TokenKind, what: &str) -> PResult<&'t Token> {
        if self.check_kind(kind) {
            Ok(self.next())
        } else if self.at_end() {
            self.err(format!("expected {what}, found end of input"))
        } else {
            self.err(format!("expected {what}, found {}", self.peek()))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        Ok(self.expect_kind(TokenKind::Identifier, "identifier")?.text.clone())
    }

    /// Skips one top-level statement together with any indented block.
    fn skip_statement(&mut self) {
        while !self.at_end() && !self.check_kind(TokenKind::Newline) {
            self.pos += 1;
        }
        self.pos += 1;
        if self.check_kind(TokenKind::Indent) {
            let mut depth = 0usize;
            while !self.at_end() {
                match self.next().kind {
                    TokenKind::Indent => depth += 1,
                    TokenKind::Dedent => {
                        depth -= 1;
                        if depth == 0 {
                            break;
                        }
                    }
                    _ => {}
                }
            }
        }
    }

    fn kernel(&mut self) -> PResult<KernelAst> {
        self.pos += 1; // def
        let name = self.ident()?;
        self.expect_op("(")?;
        let mut params = Vec::new();
        while !self.check_op(")") {
            let tok = self.expect_kind(TokenKind::Identifier, "parameter name")?;
            if !self.eat_op(":") {
                return Err(ParseError::MissingAnnotation {
                    kernel: name.clone(),
                    param: tok.text.clone(),
                    line: tok.line,
                });
            }
            let ty = self.type_annotation()?;
            if params.iter().any(|p: &Param| p.name == tok.text) {
                return self.err(format!("duplicate parameter `{}`", tok.text));
            }
            params.push(Param {
                name: tok.text.clone(),
                ty,
            });
            if !self.eat_op(",") {
                break;
            }
        }
        self.expect_op(")")?;
        if self.eat_op("->") {
            while !self.at_end() && !self.check_op(":") {
                self.pos += 1;
            }
        }
        self.expect_op(":")?;
        let saved = self.kernels.clone();
        for p in &params {
            if matches!(p.ty, TypeAnnotation::KernelSignature(_)) {
                self.kernels.insert(p.name.clone());
            }
        }
        let body = if self.check_kind(TokenKind::Newline) {
            self.pos += 1;
            if self.check_kind(TokenKind::Indent) {
                self.block()?
            } else {
                Vec::new()
            }
        } else {
            self.simple_statement()?
        };
        self.kernels = saved;
        Ok(KernelAst { name, params, body })
    }

    fn type_annotation(&mut self) -> PResult<TypeAnnotation> {
        let tok = self.expect_kind(TokenKind::Identifier, "type name")?;
        let mut name = tok.text.clone();
        while self.check_op(".") {
            self.pos += 1;
            name = format!("{name}.{}", self.ident()?);
        }
        let unknown = |n: &str| ParseError::UnknownType {
            name: n.to_string(),
            line: tok.line,
        };
        Ok(match name.as_str() {
            "qreg" => TypeAnnotation::Qreg,
            "qubit" => TypeAnnotation::Qubit,
            "int" => TypeAnnotation::Int,
            "float" => TypeAnnotation::Float,
            "bool" => TypeAnnotation::Bool,
            "PauliOperator" | "Operator" => TypeAnnotation::Pauli,
            "IntRef" => TypeAnnotation::IntRef,
            "FloatRef" => TypeAnnotation::FloatRef,
            "BoolRef" => TypeAnnotation::BoolRef,
            "matrix" | "Matrix" => TypeAnnotation::Matrix,
            "List" | "list" => {
                self.expect_op("[")?;
                let inner = self.type_annotation()?;
                self.expect_op("]")?;
                match inner {
                    TypeAnnotation::Float => TypeAnnotation::ListFloat,
                    TypeAnnotation::Int => TypeAnnotation::ListInt,
                    TypeAnnotation::Pauli => TypeAnnotation::ListPauli,
                    other => return Err(unknown(&format!("List[{other}]"))),
                }
            }
            "KernelSignature" => {
                let close = if self.eat_op("(") {
                    ")"
                } else {
                    self.expect_op("[")?;
                    "]"
                };
                let mut inner = Vec::new();
                while !self.check_op(close) {
                    inner.push(self.type_annotation()?);
                    if !self.eat_op(",") {
                        break;
                    }
                }
                self.expect_op(close)?;
                TypeAnnotation::KernelSignature(inner)
            }
            other => return Err(unknown(other)),
        })
    }

    /// INDENT stmt+ DEDENT
    fn block(&mut self) -> PResult<Vec<Stmt>> {
        self.expect_kind(TokenKind::Indent, "indented block")?;
        let mut out = Vec::new();
        while !self.at_end() && !self.check_kind(TokenKind::Dedent) {
            out.extend(self.statement()?);
        }
        if !self.at_end() {
            self.pos += 1;
        }
        Ok(out)
    }

    /// Body after a `:`; either an indented block or a statement on the same line.
    fn suite(&mut self) -> PResult<Vec<Stmt>> {
        self.expect_op(":")?;
        if self.check_kind(TokenKind::Newline) {
            self.pos += 1;
            if !self.check_kind(TokenKind::Indent) {
                return self.err("expected an indented block");
            }
            self.block()
        } else {
            self.simple_statement()
        }
    }

    fn statement(&mut self) -> PResult<Vec<Stmt>> {
        let t = self.peek();
        let line = t.line;
        if t.is_op("@") {
            // decorators inside bodies carry no meaning; drop the line
            self.skip_statement();
            return Ok(Vec::new());
        }
        if t.kind == TokenKind::Keyword {
            match t.text.as_str() {
                "for" => {
                    self.pos += 1;
                    let var = self.ident()?;
                    if !self.check_kw("in") {
                        return self.err("expected `in`");
                    }
                    self.pos += 1;
                    let iter = self.expr()?;
                    let body = self.suite()?;
                    return Ok(vec![Stmt::new(StmtKind::For { var, iter, body }, line)]);
                }
                "if" => {
                    self.pos += 1;
                    let cond = self.expr()?;
                    let body = self.suite()?;
                    let mut branches = vec![(cond, body)];
                    let mut orelse = Vec::new();
                    loop {
                        if self.check_kw("elif") {
                            self.pos += 1;
                            let c = self.expr()?;
                            let b = self.suite()?;
                            branches.push((c, b));
                        } else if self.check_kw("else") {
                            self.pos += 1;
                            orelse = self.suite()?;
                            break;
                        } else {
                            break;
                        }
                    }
                    return Ok(vec![Stmt::new(StmtKind::If { branches, orelse }, line)]);
                }
                "with" => {
                    self.pos += 1;
                    return Ok(vec![self.with_statement(line)?]);
                }
                "elif" | "else" => return self.err(format!("`{}` without matching `if`", t.text)),
                "def" => return self.err("nested kernel definitions are not supported"),
                _ => {}
            }
        }
        self.simple_statement()
    }

    fn with_statement(&mut self, line: usize) -> PResult<Stmt> {
        let head = self.ident()?;
        match head.as_str() {
            "compute" | "action" => {
                let body = self.suite()?;
                Ok(Stmt::new(
                    if head == "compute" {
                        StmtKind::WithCompute(body)
                    } else {
                        StmtKind::WithAction(body)
                    },
                    line,
                ))
            }
            "decompose" => {
                self.expect_op("(")?;
                let qreg = self.expr()?;
                let mut method = None;
                if self.eat_op(",") && !self.check_op(")") {
                    let t = self.next();
                    match t.kind {
                        TokenKind::Identifier | TokenKind::String => method = Some(t.text.clone()),
                        _ => {
                            self.pos -= 1;
                            return self.err("expected a synthesis method name");
                        }
                    }
                }
                self.expect_op(")")?;
                if !self.check_kw("as") {
                    return self.err("expected `as <matrix name>` after decompose(...)");
                }
                self.pos += 1;
                let var = self.ident()?;
                let body = self.suite()?;
                Ok(Stmt::new(StmtKind::WithDecompose { qreg, method, var, body }, line))
            }
            other => self.err(format!("unsupported with-block `{other}`")),
        }
    }

    /// One logical line: `pass`, an assignment or a call.
    fn simple_statement(&mut self) -> PResult<Vec<Stmt>> {
        let line = self.peek().line;
        let stmt = if self.check_kw("pass") {
            self.pos += 1;
            Stmt::new(StmtKind::Pass, line)
        } else {
            let e = self.expr()?;
            let aug = [("=", None), ("+=", Some(BinOp::Add)), ("-=", Some(BinOp::Sub)), ("*=", Some(BinOp::Mul)), ("/=", Some(BinOp::Div))]
                .into_iter()
                .find(|(op, _)| self.check_op(op));
            if let Some((_, op)) = aug {
                self.pos += 1;
                let rhs = self.expr()?;
                let target = match &e {
                    Expr::Name(n) => AssignTarget::Name(n.clone()),
                    Expr::Index(base, idx) => match base.as_ref() {
                        Expr::Name(n) => AssignTarget::Index(n.clone(), idx.clone()),
                        _ => return self.err("can only assign to a name or name[index]"),
                    },
                    _ => return self.err("can only assign to a name or name[index]"),
                };
                let value = match op {
                    None => rhs,
                    Some(op) => Expr::Binary(op, Box::new(e), Box::new(rhs)),
                };
                Stmt::new(StmtKind::Assign { target, value }, line)
            } else {
                self.call_statement(e, line)?
            }
        };
        self.eat_op(";");
        if self.at_end() {
            return Ok(vec![stmt]);
        }
        if !self.check_kind(TokenKind::Newline) {
            return self.err(format!("expected end of line, found {}", self.peek()));
        }
        self.pos += 1;
        Ok(vec![stmt])
    }

    fn call_statement(&self, e: Expr, line: usize) -> PResult<Stmt> {
        let Expr::Call(func, mut args) = e else {
            return self.err("expression statement must be a call");
        };
        let (name, class) = classify_call(&func, &self.kernels);
        let take_ctrl = |args: &mut Vec<Expr>, m: Modifier| -> PResult<Option<Expr>> {
            if m != Modifier::Ctrl {
                return Ok(None);
            }
            if args.is_empty() {
                return self.err(format!("`{name}.ctrl` needs a control operand"));
            }
            Ok(Some(args.remove(0)))
        };
        let kind = match class {
            CallClass::Print => StmtKind::Print(args),
            CallClass::Intrinsic(modifier) => {
                let ctrl = take_ctrl(&mut args, modifier)?;
                let broadcast = name != EXP_I_THETA
                    && Gate::from_name(&name).is_some_and(|g| g.num_targets() == 1)
                    && args.first().is_some_and(|a| !is_single_qubit_expr(a));
                StmtKind::GateCall {
                    name,
                    modifier,
                    ctrl,
                    args,
                    broadcast,
                }
            }
            CallClass::Kernel => StmtKind::KernelCall {
                name,
                modifier: Modifier::None,
                ctrl: None,
                args,
            },
            CallClass::KernelModifier(modifier) => {
                let ctrl = take_ctrl(&mut args, modifier)?;
                StmtKind::KernelCall {
                    name,
                    modifier,
                    ctrl,
                    args,
                }
            }
            CallClass::Classical => {
                if name.is_empty() {
                    return self.err("unsupported call target");
                }
                StmtKind::ClassicalCall { name, args }
            }
        };
        Ok(Stmt::new(kind, line))
    }

    // ---- expressions, lowest precedence first ----

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.and_expr()?;
        while self.check_kw("or") {
            self.pos += 1;
            let rhs = self.and_expr()?;
            lhs = Expr::Binary(BinOp::Or, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.not_expr()?;
        while self.check_kw("and") {
            self.pos += 1;
            let rhs = self.not_expr()?;
            lhs = Expr::Binary(BinOp::And, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> PResult<Expr> {
        if self.check_kw("not") {
            self.pos += 1;
            return Ok(Expr::Unary(UnOp::Not, Box::new(self.not_expr()?)));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> PResult<Expr> {
        let mut lhs = self.arith()?;
        loop {
            let op = match self.peek_op() {
                Some("==") => BinOp::Eq,
                Some("!=") => BinOp::Ne,
                Some("<") => BinOp::Lt,
                Some("<=") => BinOp::Le,
                Some(">") => BinOp::Gt,
                Some(">=") => BinOp::Ge,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.arith()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn peek_op(&self) -> Option<&'t str> {
        if self.at_end() {
            return None;
        }
        let t = self.peek();
        (t.kind == TokenKind::Operator).then_some(t.text.as_str())
    }

    fn arith(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek_op() {
                Some("+") => BinOp::Add,
                Some("-") => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek_op() {
                Some("*") => BinOp::Mul,
                Some("/") => BinOp::Div,
                Some("//") => BinOp::FloorDiv,
                Some("%") => BinOp::Mod,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> PResult<Expr> {
        match self.peek_op() {
            Some("-") => {
                self.pos += 1;
                Ok(Expr::Unary(UnOp::Neg, Box::new(self.factor()?)))
            }
            Some("+") => {
                self.pos += 1;
                Ok(Expr::Unary(UnOp::Pos, Box::new(self.factor()?)))
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> PResult<Expr> {
        let base = self.postfix()?;
        if self.eat_op("**") {
            let exp = self.factor()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.atom()?;
        loop {
            if self.eat_op("(") {
                let mut args = Vec::new();
                while !self.check_op(")") {
                    args.push(self.expr()?);
                    if !self.eat_op(",") {
                        break;
                    }
                }
                self.expect_op(")")?;
                e = Expr::Call(Box::new(e), args);
            } else if self.eat_op("[") {
                let mut idx = Vec::new();
                loop {
                    idx.push(self.subscript()?);
                    if !self.eat_op(",") || self.check_op("]") {
                        break;
                    }
                }
                self.expect_op("]")?;
                e = Expr::Index(Box::new(e), idx);
            } else if self.eat_op(".") {
                let attr = self.ident()?;
                e = Expr::Attr(Box::new(e), attr);
            } else {
                return Ok(e);
            }
        }
    }

    fn subscript(&mut self) -> PResult<Expr> {
        let lo = if self.check_op(":") { None } else { Some(Box::new(self.expr()?)) };
        if !self.eat_op(":") {
            return match lo {
                Some(e) => Ok(*e),
                None => self.err("empty index"),
            };
        }
        let hi = if self.check_op("]") || self.check_op(",") {
            None
        } else {
            Some(Box::new(self.expr()?))
        };
        Ok(Expr::Slice(lo, hi))
    }

    fn atom(&mut self) -> PResult<Expr> {
        if self.at_end() {
            return self.err("unexpected end of input");
        }
        let t = self.peek();
        match t.kind {
            TokenKind::Number => {
                self.pos += 1;
                parse_number(&t.text).ok_or_else(|| ParseError::Syntax {
                    line: t.line,
                    column: t.column,
                    message: format!("invalid number `{}`", t.text),
                })
            }
            TokenKind::String => {
                self.pos += 1;
                Ok(Expr::Str(t.text.clone()))
            }
            TokenKind::Identifier => {
                self.pos += 1;
                Ok(Expr::Name(t.text.clone()))
            }
            TokenKind::Keyword if t.text == "True" || t.text == "False" => {
                self.pos += 1;
                Ok(Expr::Bool(t.text == "True"))
            }
            TokenKind::Operator if t.text == "(" => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_op(")")?;
                Ok(e)
            }
            TokenKind::Operator if t.text == "[" => {
                self.pos += 1;
                let mut items = Vec::new();
                while !self.check_op("]") {
                    items.push(self.expr()?);
                    if !self.eat_op(",") {
                        break;
                    }
                }
                self.expect_op("]")?;
                Ok(Expr::List(items))
            }
            _ => self.err(format!("unexpected {t}")),
        }
    }
}

fn parse_number(text: &str) -> Option<Expr> {
    if let Some(body) = text.strip_suffix('j') {
        return body.parse::<f64>().ok().map(Expr::Imag);
    }
    if text.contains(['.', 'e']) {
        return text.parse::<f64>().ok().map(Expr::Float);
    }
    text.parse::<i64>().ok().map(Expr::Int)
}

/// True for `q[i]` with a single non-slice index, which names one qubit.
fn is_single_qubit_expr(e: &Expr) -> bool {
    matches!(e, Expr::Index(_, idx) if idx.len() == 1 && !matches!(idx[0], Expr::Slice(..)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(src: &str) -> KernelAst {
        parse_kernel(src, &BTreeSet::new()).unwrap()
    }

    fn perr(src: &str) -> ParseError {
        parse_kernel(src, &BTreeSet::new()).unwrap_err()
    }

    #[test]
    fn bell() {
        let k = parse("@qjit\ndef bell(q : qreg):\n    H(q[0])\n    CX(q[0], q[1])\n    for i in range(q.size()):\n        Measure(q[i])\n");
        assert_eq!(k.name, "bell");
        assert_eq!(k.params, vec![Param { name: "q".into(), ty: TypeAnnotation::Qreg }]);
        assert_eq!(k.body.len(), 3);
        assert!(matches!(&k.body[2].kind, StmtKind::For { var, body, .. } if var == "i" && body.len() == 1));
        assert_eq!(k.body[1].line, 4);
    }

    #[test]
    fn aliases_and_broadcast() {
        let k = parse("def k(q: qreg):\n    CNOT(q[1], q[0])\n    X(q)\n    Mz(q[0])\n");
        match &k.body[0].kind {
            StmtKind::GateCall { name, broadcast, .. } => {
                assert_eq!(name, "CX");
                assert!(!broadcast);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(&k.body[1].kind, StmtKind::GateCall { broadcast: true, .. }));
        assert!(matches!(&k.body[2].kind, StmtKind::GateCall { name, .. } if name == "Measure"));
    }

    #[test]
    fn ctrl_modifiers() {
        let src = "def ucc1(q: qreg, x: float):\n    pass\ndef kernel(q: qreg, d : float):\n    ucc1.ctrl(q[4], q[0:4], d)\n    Z.ctrl(q[0: q.size() - 1], q[q.size() - 1])\n";
        let ks = parse_module(src, &BTreeSet::new()).unwrap();
        let body = &ks[1].body;
        match &body[0].kind {
            StmtKind::KernelCall { name, modifier, ctrl, args } => {
                assert_eq!(name, "ucc1");
                assert_eq!(*modifier, Modifier::Ctrl);
                assert!(ctrl.is_some());
                assert_eq!(args.len(), 2);
                assert!(matches!(&args[0], Expr::Index(_, i) if matches!(i[0], Expr::Slice(..))));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(&body[1].kind, StmtKind::GateCall { modifier: Modifier::Ctrl, args, .. } if args.len() == 1));
    }

    #[test]
    fn kernel_signature_params_are_callable() {
        let src = "def run_grover(q: qreg,\n                oracle_var:\n                    KernelSignature(qreg),\n                iterations: int):\n    for i in range(iterations):\n        oracle_var(q)\n";
        let k = parse(src);
        assert_eq!(k.params[1].ty, TypeAnnotation::KernelSignature(vec![TypeAnnotation::Qreg]));
        let StmtKind::For { body, .. } = &k.body[0].kind else { panic!() };
        assert!(matches!(&body[0].kind, StmtKind::KernelCall { name, .. } if name == "oracle_var"));
    }

    #[test]
    fn unknown_calls_are_classical() {
        let k = parse("def k(q: qreg):\n    foo(q)\n");
        assert!(matches!(&k.body[0].kind, StmtKind::ClassicalCall { name, .. } if name == "foo"));
    }

    #[test]
    fn decompose_block() {
        let src = "def ccnot(q : qreg):\n    X(q)\n    with decompose(q) as ccnot:\n        ccnot = np.eye(8)\n        ccnot[6,6] = 0.0\n    Measure(q)\n";
        let k = parse(src);
        match &k.body[1].kind {
            StmtKind::WithDecompose { method, var, body, .. } => {
                assert_eq!(*method, None);
                assert_eq!(var, "ccnot");
                assert!(matches!(&body[1].kind, StmtKind::Assign { target: AssignTarget::Index(n, i), .. } if n == "ccnot" && i.len() == 2));
            }
            other => panic!("{other:?}"),
        }
        let k = parse("def a(q: qreg, x: List[float]):\n    with decompose(q, kak) as u:\n        u = m\n");
        assert!(matches!(&k.body[0].kind, StmtKind::WithDecompose { method: Some(m), .. } if m == "kak"));
    }

    #[test]
    fn if_elif_else_and_single_line_suites() {
        let src = "def k(q: qreg):\n    p = Measure(q[0])\n    if p == 1: X(q[0])\n    elif p:\n        X(q[1])\n    else:\n        pass\n";
        let k = parse(src);
        let StmtKind::If { branches, orelse } = &k.body[1].kind else { panic!() };
        assert_eq!(branches.len(), 2);
        assert_eq!(orelse.len(), 1);
    }

    #[test]
    fn augmented_assignment_desugars() {
        let k = parse("def k(q: qreg):\n    x = 1\n    x += 2\n");
        let StmtKind::Assign { value, .. } = &k.body[1].kind else { panic!() };
        assert_eq!(*value, Expr::Binary(BinOp::Add, Box::new(Expr::name("x")), Box::new(Expr::Int(2))));
    }

    #[test]
    fn precedence() {
        let k = parse("def k(q: qreg):\n    x = -a ** 2 + b * c / 2. - 1j\n");
        let StmtKind::Assign { value, .. } = &k.body[0].kind else { panic!() };
        let expected = Expr::Binary(
            BinOp::Sub,
            Box::new(Expr::Binary(
                BinOp::Add,
                Box::new(Expr::Unary(
                    UnOp::Neg,
                    Box::new(Expr::Binary(BinOp::Pow, Box::new(Expr::name("a")), Box::new(Expr::Int(2)))),
                )),
                Box::new(Expr::Binary(
                    BinOp::Div,
                    Box::new(Expr::Binary(BinOp::Mul, Box::new(Expr::name("b")), Box::new(Expr::name("c")))),
                    Box::new(Expr::Float(2.0)),
                )),
            )),
            Box::new(Expr::Imag(1.0)),
        );
        assert_eq!(*value, expected);
    }

    #[test]
    fn empty_body_is_legal() {
        let k = parse("def k(q: qreg):\n");
        assert!(k.body.is_empty());
        let k = parse("def k(q: qreg): pass\n");
        assert_eq!(k.body.len(), 1);
    }

    #[test]
    fn errors() {
        assert!(matches!(perr("def k(q):\n    H(q[0])\n"), ParseError::MissingAnnotation { .. }));
        assert!(matches!(perr("def k(q: tensor):\n    H(q[0])\n"), ParseError::UnknownType { .. }));
        assert!(matches!(perr("def k(q: qreg):\n    x\n"), ParseError::Syntax { .. }));
        assert!(matches!(perr("def k(q: qreg):\n    for i range(3):\n        H(q[i])\n"), ParseError::Syntax { line: 2, .. }));
        assert!(matches!(perr("x = 1\n"), ParseError::NoKernel));
        assert!(matches!(perr("def k(q: qreg):\n    else:\n        pass\n"), ParseError::Syntax { .. }));
        assert!(matches!(perr("def k(q: qreg):\n    with foo:\n        pass\n"), ParseError::Syntax { .. }));
    }

    #[test]
    fn indented_source_is_dedented() {
        let k = parse("    def k(q: qreg):\n        H(q[0])\n");
        assert_eq!(k.body.len(), 1);
    }

    #[test]
    fn top_level_noise_is_skipped() {
        let src = "import numpy as np\nfrom qcor import *\nclass A:\n    x = 1\n@qjit\ndef k(q: qreg):\n    H(q[0])\nq = qalloc(2)\nk(q)\n";
        let ks = parse_module(src, &BTreeSet::new()).unwrap();
        assert_eq!(ks.len(), 1);
    }
}
