//! Workspace parser and printer.
//!
//! The file is first cut into statements (split at `;` and newlines outside
//! brackets) and block delimiters. A `{` right after `:`, `=` or `,` starts a
//! finite type literal instead of a block.

use std::fmt::Write as _;

use crate::ast::*;
use wirecalc_core::expr;

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub pos: Pos,
    pub msg: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.pos, self.msg)
    }
}

fn diag(pos: Pos, msg: impl Into<String>) -> Diagnostic {
    Diagnostic { pos, msg: msg.into() }
}

#[derive(Debug, Clone)]
enum Piece {
    Stmt(String, Pos),
    Open(Pos),
    Close(Pos),
}

fn split(src: &str) -> Vec<Piece> {
    let mut out = Vec::new();
    let mut buf = String::new();
    let mut start = Pos::default();
    let (mut line, mut col) = (1, 0);
    let mut depth = 0usize;
    let mut set_depth = 0usize;
    let mut in_str = false;
    let mut in_comment = false;
    let flush = |buf: &mut String, start: Pos, out: &mut Vec<Piece>| {
        let lead = buf.len() - buf.trim_start().len();
        let text = buf.trim().to_string();
        if !text.is_empty() {
            out.push(Piece::Stmt(text, Pos { line: start.line, col: start.col + lead }));
        }
        buf.clear();
    };
    for ch in src.chars() {
        col += 1;
        let here = Pos { line, col };
        if ch == '\n' {
            in_comment = false;
            if depth == 0 && set_depth == 0 && !in_str {
                flush(&mut buf, start, &mut out);
            } else if !buf.is_empty() {
                buf.push(' ');
            }
            line += 1;
            col = 0;
            continue;
        }
        if in_comment {
            continue;
        }
        if buf.is_empty() {
            start = here;
        }
        if in_str {
            buf.push(ch);
            if ch == '"' {
                in_str = false;
            }
            continue;
        }
        match ch {
            '"' => {
                in_str = true;
                buf.push(ch);
            }
            '#' => in_comment = true,
            '(' | '[' => {
                depth += 1;
                buf.push(ch);
            }
            ')' | ']' => {
                depth = depth.saturating_sub(1);
                buf.push(ch);
            }
            '{' => {
                let prev = buf.trim_end().chars().last();
                if set_depth > 0 || matches!(prev, Some(':') | Some('=') | Some(',')) {
                    set_depth += 1;
                    buf.push(ch);
                } else {
                    flush(&mut buf, start, &mut out);
                    out.push(Piece::Open(here));
                }
            }
            '}' => {
                if set_depth > 0 {
                    set_depth -= 1;
                    buf.push(ch);
                } else {
                    flush(&mut buf, start, &mut out);
                    out.push(Piece::Close(here));
                }
            }
            ';' if depth == 0 && set_depth == 0 => flush(&mut buf, start, &mut out),
            _ => buf.push(ch),
        }
    }
    flush(&mut buf, start, &mut out);
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Sym(&'static str),
    /// Anything else; only expressions may contain these.
    Other(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    offset: usize,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '.' || c == '\''
}

fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let next = chars.get(i + 1).copied();
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        if two == "->" || two == "<-" {
            out.push(Token { tok: Tok::Sym(if two == "->" { "->" } else { "<-" }), offset: i });
            i += 2;
            continue;
        }
        let numeric_start = c.is_ascii_digit() || ((c == '-' || c == '+') && matches!(next, Some(d) if d.is_ascii_digit() || d == '.'));
        if is_word_char(c) || numeric_start {
            let start = i;
            i += 1;
            while i < chars.len() {
                let d = chars[i];
                let exp_sign = (d == '-' || d == '+')
                    && numeric_start
                    && matches!(chars[i - 1], 'e' | 'E')
                    && chars[start..i - 1].iter().all(|x| x.is_ascii_digit() || *x == '.' || *x == '-' || *x == '+');
                if is_word_char(d) || exp_sign {
                    i += 1;
                } else {
                    break;
                }
            }
            out.push(Token { tok: Tok::Word(chars[start..i].iter().collect()), offset: start });
            continue;
        }
        let sym = match c {
            ':' => ":",
            '=' => "=",
            ',' => ",",
            '(' => "(",
            ')' => ")",
            '[' => "[",
            ']' => "]",
            '{' => "{",
            '}' => "}",
            '^' => "^",
            _ => {
                out.push(Token { tok: Tok::Other(c), offset: i });
                i += 1;
                continue;
            }
        };
        out.push(Token { tok: Tok::Sym(sym), offset: i });
        i += 1;
    }
    out
}

struct Cursor<'a> {
    toks: &'a [Token],
    i: usize,
    pos: Pos,
    text_len: usize,
}

impl<'a> Cursor<'a> {
    fn here(&self) -> Pos {
        let off = self.toks.get(self.i).map(|t| t.offset).unwrap_or(self.text_len);
        Pos { line: self.pos.line, col: self.pos.col + off }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.tok)
    }

    fn done(&self) -> bool {
        self.i >= self.toks.len()
    }

    fn word(&mut self, what: &str) -> Result<String, Diagnostic> {
        match self.peek() {
            Some(Tok::Word(w)) => {
                let w = w.clone();
                self.i += 1;
                Ok(w)
            }
            other => Err(diag(self.here(), format!("expected {what}, found {}", describe(other)))),
        }
    }

    fn name(&mut self, what: &str) -> Result<String, Diagnostic> {
        let here = self.here();
        let w = self.word(what)?;
        if w.contains('.') || w.starts_with(|c: char| c.is_ascii_digit() || c == '-' || c == '+') {
            return Err(diag(here, format!("`{w}` is not a valid {what}")));
        }
        Ok(w)
    }

    fn sym(&mut self, s: &'static str) -> Result<(), Diagnostic> {
        match self.peek() {
            Some(Tok::Sym(t)) if *t == s => {
                self.i += 1;
                Ok(())
            }
            other => Err(diag(self.here(), format!("expected `{s}`, found {}", describe(other)))),
        }
    }

    fn eat(&mut self, s: &'static str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(t)) if *t == s) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn keyword(&mut self, k: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Word(w)) if w == k) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn end(&self) -> Result<(), Diagnostic> {
        if self.done() {
            Ok(())
        } else {
            Err(diag(self.here(), format!("unexpected {}", describe(self.peek()))))
        }
    }

    fn number(&mut self) -> Result<f64, Diagnostic> {
        let here = self.here();
        let w = self.word("a number")?;
        w.parse::<f64>().map_err(|_| diag(here, format!("`{w}` is not a number")))
    }

    fn type_expr(&mut self) -> Result<TypeExpr, Diagnostic> {
        if self.eat("{") {
            let mut syms = Vec::new();
            if !self.eat("}") {
                loop {
                    syms.push(self.word("a symbol")?);
                    if self.eat("}") {
                        break;
                    }
                    self.sym(",")?;
                }
            }
            return Ok(TypeExpr::Finite(syms));
        }
        let here = self.here();
        let w = self.name("a type")?;
        if w == "R" {
            self.eat("^");
            if let Some(Tok::Word(d)) = self.peek() {
                let d = d.parse::<usize>().map_err(|_| diag(self.here(), format!("`{d}` is not a dimension")))?;
                self.i += 1;
                return Ok(TypeExpr::Euclid(d));
            }
            return Ok(TypeExpr::Euclid(1));
        }
        let _ = here;
        Ok(TypeExpr::Alias(w))
    }

    /// `A` or `(A,B)` or `()`.
    fn tuple(&mut self) -> Result<Vec<String>, Diagnostic> {
        if self.eat("(") {
            let mut v = Vec::new();
            if !self.eat(")") {
                loop {
                    v.push(self.word("a symbol")?);
                    if self.eat(")") {
                        break;
                    }
                    self.sym(",")?;
                }
            }
            Ok(v)
        } else {
            Ok(vec![self.word("a symbol")?])
        }
    }

    fn port_ref(&mut self) -> Result<PortRef, Diagnostic> {
        let here = self.here();
        let w = self.word("a port reference `owner.port`")?;
        match w.split_once('.') {
            Some((o, p)) if !o.is_empty() && !p.is_empty() && !p.contains('.') => {
                Ok(PortRef { pos: here, owner: o.into(), port: p.into() })
            }
            _ => Err(diag(here, format!("expected `owner.port`, found `{w}`"))),
        }
    }

    fn real_matrix(&mut self) -> Result<Vec<Vec<f64>>, Diagnostic> {
        self.sym("[")?;
        let mut rows = Vec::new();
        if self.eat("]") {
            return Ok(rows);
        }
        loop {
            self.sym("[")?;
            let mut row = Vec::new();
            if !self.eat("]") {
                loop {
                    row.push(self.number()?);
                    if self.eat("]") {
                        break;
                    }
                    self.sym(",")?;
                }
            }
            rows.push(row);
            if self.eat("]") {
                break;
            }
            self.sym(",")?;
        }
        Ok(rows)
    }
}

fn describe(t: Option<&Tok>) -> String {
    match t {
        None => "end of statement".into(),
        Some(Tok::Word(w)) => format!("`{w}`"),
        Some(Tok::Sym(s)) => format!("`{s}`"),
        Some(Tok::Other(c)) => format!("`{c}`"),
    }
}

struct Parser {
    pieces: Vec<Piece>,
    i: usize,
    diags: Vec<Diagnostic>,
}

impl Parser {
    fn skip_block(&mut self) {
        if !matches!(self.pieces.get(self.i), Some(Piece::Open(_))) {
            return;
        }
        let mut depth = 0;
        while let Some(p) = self.pieces.get(self.i) {
            self.i += 1;
            match p {
                Piece::Open(_) => depth += 1,
                Piece::Close(_) => {
                    depth -= 1;
                    if depth == 0 {
                        return;
                    }
                }
                _ => {}
            }
        }
    }

    /// Statements of the block that follows, or `None` if there is no block.
    fn block(&mut self, header: Pos) -> Option<Vec<(String, Pos)>> {
        match self.pieces.get(self.i) {
            Some(Piece::Open(_)) => self.i += 1,
            _ => {
                self.diags.push(diag(header, "expected `{` after declaration header"));
                return None;
            }
        }
        let mut out = Vec::new();
        loop {
            match self.pieces.get(self.i).cloned() {
                Some(Piece::Stmt(t, p)) => {
                    out.push((t, p));
                    self.i += 1;
                }
                Some(Piece::Close(_)) => {
                    self.i += 1;
                    return Some(out);
                }
                Some(Piece::Open(p)) => {
                    self.diags.push(diag(p, "nested blocks are not allowed"));
                    self.skip_block();
                }
                None => {
                    self.diags.push(diag(header, "block is not closed"));
                    return Some(out);
                }
            }
        }
    }

    fn run(&mut self) -> Workspace {
        let mut ws = Workspace::default();
        while let Some(piece) = self.pieces.get(self.i).cloned() {
            self.i += 1;
            match piece {
                Piece::Open(p) => {
                    self.diags.push(diag(p, "block without a declaration"));
                    self.i -= 1;
                    self.skip_block();
                }
                Piece::Close(p) => self.diags.push(diag(p, "unmatched `}`")),
                Piece::Stmt(text, pos) => match self.item(&text, pos) {
                    Ok(Some(item)) => ws.items.push(item),
                    Ok(None) => {}
                    Err(d) => {
                        self.diags.push(d);
                        self.skip_block();
                    }
                },
            }
        }
        ws
    }

    fn body<T>(
        &mut self,
        header: Pos,
        mut each: impl FnMut(&mut Cursor, &str, Pos) -> Result<T, Diagnostic>,
    ) -> Vec<T> {
        let mut out = Vec::new();
        for (text, pos) in self.block(header).unwrap_or_default() {
            let toks = tokenize(&text);
            let mut c = Cursor { toks: &toks, i: 0, pos, text_len: text.chars().count() };
            let r = each(&mut c, &text, pos).and_then(|v| c.end().map(|_| v));
            match r {
                Ok(v) => out.push(v),
                Err(d) => self.diags.push(d),
            }
        }
        out
    }

    fn item(&mut self, text: &str, pos: Pos) -> Result<Option<Item>, Diagnostic> {
        if let Some(rest) = text.strip_prefix("run") {
            if rest.is_empty() || rest.starts_with(char::is_whitespace) {
                let words = shell_words(rest).map_err(|m| diag(pos, m))?;
                let (command, args) = words.split_first().ok_or_else(|| diag(pos, "`run` needs a command"))?;
                return Ok(Some(Item::Run(RunDecl { pos, command: command.clone(), args: args.to_vec() })));
            }
        }
        let toks = tokenize(text);
        let mut c = Cursor { toks: &toks, i: 0, pos, text_len: text.chars().count() };
        let kw = c.word("a declaration")?;
        match kw.as_str() {
            "type" => {
                let name = c.name("type name")?;
                c.sym("=")?;
                let ty = c.type_expr()?;
                c.end()?;
                Ok(Some(Item::Type(TypeDecl { pos, name, ty })))
            }
            "box" => {
                let name = c.name("box name")?;
                c.end()?;
                let ports = self.body(pos, |c, _, p| {
                    let dir = if c.keyword("in") {
                        Dir::In
                    } else if c.keyword("out") {
                        Dir::Out
                    } else {
                        return Err(diag(p, "expected `in` or `out`"));
                    };
                    let name = c.name("port name")?;
                    c.sym(":")?;
                    let ty = c.type_expr()?;
                    Ok(PortDecl { pos: p, dir, name, ty })
                });
                Ok(Some(Item::Box(BoxDecl { pos, name, ports })))
            }
            "wiring" => {
                let name = c.name("wiring name")?;
                c.sym(":")?;
                let mut slots = Vec::new();
                while !matches!(c.peek(), Some(Tok::Sym("->")) | None) {
                    let sp = c.here();
                    let s = c.name("slot name")?;
                    let b = if c.eat(":") { c.name("box name")? } else { s.clone() };
                    slots.push(Slot { pos: sp, name: s, box_name: b });
                }
                c.sym("->")?;
                let outer = c.name("outer box name")?;
                c.end()?;
                let links = self.body(pos, |c, _, p| {
                    let target = c.port_ref()?;
                    c.sym("<-")?;
                    let source = c.port_ref()?;
                    Ok(Link { pos: p, target, source })
                });
                Ok(Some(Item::Wiring(WiringDecl { pos, name, slots, outer, links })))
            }
            "discrete" => {
                let (name, box_name) = named_on(&mut c)?;
                let mut states = Vec::new();
                let mut rows = Vec::new();
                let entries = self.body(pos, |c, _, p| {
                    if c.keyword("states") {
                        let mut v = Vec::new();
                        while !c.done() {
                            v.push(c.word("a state")?);
                        }
                        return Ok(Err(v));
                    }
                    c.keyword("table");
                    let input = c.tuple()?;
                    let state = c.word("a state")?;
                    c.sym("->")?;
                    let output = c.tuple()?;
                    let next = c.word("a state")?;
                    Ok(Ok(Row { pos: p, input, state, output, next }))
                });
                for e in entries {
                    match e {
                        Ok(r) => rows.push(r),
                        Err(s) => states.extend(s),
                    }
                }
                Ok(Some(Item::Discrete(DiscreteDecl { pos, name, box_name, states, rows })))
            }
            "weighted" => {
                let (name, system) = named_on(&mut c)?;
                let weights = self.body(pos, |c, _, _| {
                    let s = c.word("a state")?;
                    c.sym("=")?;
                    Ok((s, c.number()?))
                });
                Ok(Some(Item::Weighted(WeightedDecl { pos, name, system, weights })))
            }
            "continuous" => {
                let (name, box_name) = named_on(&mut c)?;
                let mut states = Vec::new();
                let mut dots = Vec::new();
                let mut outs = Vec::new();
                let entries = self.body(pos, |c, text, p| {
                    if c.keyword("state") {
                        let mut v = Vec::new();
                        while !c.done() {
                            v.push(c.name("a state variable")?);
                        }
                        return Ok((0, v, None));
                    }
                    let kind = if c.keyword("dot") {
                        1
                    } else if c.keyword("out") {
                        2
                    } else {
                        return Err(diag(p, "expected `state`, `dot` or `out`"));
                    };
                    let var = c.name("a variable")?;
                    let eq_at = c.toks[c.i].offset;
                    c.sym("=")?;
                    let rest: String = text.chars().skip(eq_at + 1).collect();
                    let lead = rest.len() - rest.trim_start().len();
                    let col = p.col + eq_at + 1 + lead;
                    let rhs = expr::parse_at(rest.trim(), p.line, col).map_err(|e| match e {
                        wirecalc_core::Error::Parse { line, col, msg } => diag(Pos { line, col }, msg),
                        other => diag(p, other.to_string()),
                    })?;
                    c.i = c.toks.len();
                    Ok((kind, vec![var], Some(Equation { pos: p, var: String::new(), rhs })))
                });
                for (kind, mut v, eq) in entries {
                    match (kind, eq) {
                        (0, _) => states.append(&mut v),
                        (k, Some(mut e)) => {
                            e.var = v.remove(0);
                            if k == 1 {
                                dots.push(e);
                            } else {
                                outs.push(e);
                            }
                        }
                        _ => {}
                    }
                }
                Ok(Some(Item::Continuous(ContinuousDecl { pos, name, box_name, states, dots, outs })))
            }
            "linear" => {
                let (name, box_name) = named_on(&mut c)?;
                let mut decl = LinearDecl { pos, name, box_name, dim: 0, m_in: vec![], m_mid: vec![], m_out: vec![] };
                let mut seen_dim = false;
                let entries = self.body(pos, |c, _, p| {
                    let key = c.word("`dim`, `in`, `mid` or `out`")?;
                    match key.as_str() {
                        "dim" => Ok((key, c.number()?, vec![])),
                        "in" | "mid" | "out" => {
                            c.sym("=")?;
                            Ok((key, 0.0, c.real_matrix()?))
                        }
                        _ => Err(diag(p, format!("unknown linear field `{key}`"))),
                    }
                });
                for (key, n, m) in entries {
                    match key.as_str() {
                        "dim" => {
                            decl.dim = n as usize;
                            seen_dim = true;
                        }
                        "in" => decl.m_in = m,
                        "mid" => decl.m_mid = m,
                        _ => decl.m_out = m,
                    }
                }
                if !seen_dim {
                    decl.dim = decl.m_mid.len();
                }
                Ok(Some(Item::Linear(decl)))
            }
            "matrix" => {
                let (name, box_name) = named_on(&mut c)?;
                let semiring = match c.word("`nat` or `real`")?.as_str() {
                    "nat" => SemiringTag::Nat,
                    "real" => SemiringTag::Real,
                    other => return Err(diag(pos, format!("unknown semiring `{other}`"))),
                };
                c.end()?;
                let rows = self.body(pos, |c, _, _| {
                    c.keyword("row");
                    let mut v = Vec::new();
                    while !c.done() {
                        v.push(c.word("an entry")?);
                    }
                    Ok(v)
                });
                Ok(Some(Item::Matrix(MatrixDecl { pos, name, box_name, semiring, rows })))
            }
            "compose" => {
                let name = c.name("composite name")?;
                c.sym("=")?;
                let wiring = c.name("wiring name")?;
                c.sym("(")?;
                let mut fillers = Vec::new();
                if !c.eat(")") {
                    loop {
                        fillers.push(c.name("system name")?);
                        if c.eat(")") {
                            break;
                        }
                        c.sym(",")?;
                    }
                }
                c.end()?;
                Ok(Some(Item::Compose(ComposeDecl { pos, name, wiring, fillers })))
            }
            other => Err(diag(pos, format!("unknown declaration `{other}`"))),
        }
    }
}

fn named_on(c: &mut Cursor) -> Result<(String, String), Diagnostic> {
    let name = c.name("name")?;
    if !c.keyword("on") {
        return Err(diag(c.here(), "expected `on`"));
    }
    let target = c.name("box or system name")?;
    if !matches!(c.peek(), Some(Tok::Word(_))) {
        c.end()?;
    }
    Ok((name, target))
}

/// Split on whitespace, honouring double quotes.
pub fn shell_words(s: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    let mut cur: Option<String> = None;
    let mut quoted = false;
    for ch in s.chars() {
        match ch {
            '"' => {
                quoted = !quoted;
                cur.get_or_insert_with(String::new);
            }
            c if c.is_whitespace() && !quoted => {
                if let Some(w) = cur.take() {
                    out.push(w);
                }
            }
            c => cur.get_or_insert_with(String::new).push(c),
        }
    }
    if quoted {
        return Err("unterminated quote".into());
    }
    out.extend(cur);
    Ok(out)
}

/// Parse a workspace, reporting every diagnostic found.
pub fn parse_workspace(src: &str) -> Result<Workspace, Vec<Diagnostic>> {
    let mut p = Parser { pieces: split(src), i: 0, diags: Vec::new() };
    let ws = p.run();
    if p.diags.is_empty() {
        Ok(ws)
    } else {
        Err(p.diags)
    }
}

// ------------------------------------------------------------------ printer

fn type_str(t: &TypeExpr) -> String {
    match t {
        TypeExpr::Finite(s) => format!("{{{}}}", s.join(",")),
        TypeExpr::Euclid(d) => format!("R {d}"),
        TypeExpr::Alias(a) => a.clone(),
    }
}

fn tuple_str(v: &[String]) -> String {
    if v.len() == 1 {
        v[0].clone()
    } else {
        format!("({})", v.join(","))
    }
}

fn real_matrix_str(m: &[Vec<f64>]) -> String {
    let rows: Vec<String> = m
        .iter()
        .map(|r| format!("[{}]", r.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(", ")))
        .collect();
    format!("[{}]", rows.join(", "))
}

pub fn quote(a: &str) -> String {
    if a.is_empty() || a.chars().any(|c| c.is_whitespace() || c == '"' || c == ';' || c == '#') {
        format!("\"{a}\"")
    } else {
        a.to_string()
    }
}

pub fn print_item(item: &Item) -> String {
    let mut s = String::new();
    match item {
        Item::Type(d) => {
            let _ = writeln!(s, "type {} = {}", d.name, type_str(&d.ty));
        }
        Item::Box(d) => {
            let _ = writeln!(s, "box {} {{", d.name);
            for p in &d.ports {
                let dir = if p.dir == Dir::In { "in" } else { "out" };
                let _ = writeln!(s, "  {dir} {}: {}", p.name, type_str(&p.ty));
            }
            s.push_str("}\n");
        }
        Item::Wiring(d) => {
            let slots: Vec<String> = d.slots.iter().map(|x| format!("{}:{}", x.name, x.box_name)).collect();
            let _ = writeln!(s, "wiring {} : {} -> {} {{", d.name, slots.join(" "), d.outer);
            for l in &d.links {
                let _ = writeln!(s, "  {} <- {}", l.target, l.source);
            }
            s.push_str("}\n");
        }
        Item::Discrete(d) => {
            let _ = writeln!(s, "discrete {} on {} {{", d.name, d.box_name);
            let _ = writeln!(s, "  states {}", d.states.join(" "));
            for r in &d.rows {
                let _ = writeln!(s, "  {} {} -> {} {}", tuple_str(&r.input), r.state, tuple_str(&r.output), r.next);
            }
            s.push_str("}\n");
        }
        Item::Weighted(d) => {
            let _ = writeln!(s, "weighted {} on {} {{", d.name, d.system);
            for (st, w) in &d.weights {
                let _ = writeln!(s, "  {st} = {w:?}");
            }
            s.push_str("}\n");
        }
        Item::Continuous(d) => {
            let _ = writeln!(s, "continuous {} on {} {{", d.name, d.box_name);
            if !d.states.is_empty() {
                let _ = writeln!(s, "  state {}", d.states.join(" "));
            }
            for e in &d.dots {
                let _ = writeln!(s, "  dot {} = {}", e.var, e.rhs);
            }
            for e in &d.outs {
                let _ = writeln!(s, "  out {} = {}", e.var, e.rhs);
            }
            s.push_str("}\n");
        }
        Item::Linear(d) => {
            let _ = writeln!(s, "linear {} on {} {{", d.name, d.box_name);
            let _ = writeln!(s, "  dim {}", d.dim);
            let _ = writeln!(s, "  in = {}", real_matrix_str(&d.m_in));
            let _ = writeln!(s, "  mid = {}", real_matrix_str(&d.m_mid));
            let _ = writeln!(s, "  out = {}", real_matrix_str(&d.m_out));
            s.push_str("}\n");
        }
        Item::Matrix(d) => {
            let tag = if d.semiring == SemiringTag::Nat { "nat" } else { "real" };
            let _ = writeln!(s, "matrix {} on {} {tag} {{", d.name, d.box_name);
            for r in &d.rows {
                let _ = writeln!(s, "  row {}", r.join(" "));
            }
            s.push_str("}\n");
        }
        Item::Compose(d) => {
            let _ = writeln!(s, "compose {} = {}({})", d.name, d.wiring, d.fillers.join(", "));
        }
        Item::Run(d) => {
            let mut words = vec![d.command.clone()];
            words.extend(d.args.iter().map(|a| quote(a)));
            let _ = writeln!(s, "run {}", words.join(" "));
        }
    }
    s
}

pub fn print_workspace(ws: &Workspace) -> String {
    ws.items.iter().map(print_item).collect::<Vec<_>>().join("\n")
}
