/**
 * Token-boundary normalizer implementing the harness lexer's rules:
 * maximal-munch over the Java operator/punctuation tables, identifiers,
 * numeric/string/char literals and @annotations. Generated text is
 * re-lexed through this before it is written out, so token boundaries
 * always match what the scoring harness produces.
 */

const OPERATORS = [
  '>>>=',
  '>>>', '<<=', '>>=',
  '==', '!=', '<=', '>=', '&&', '||', '++', '--', '+=', '-=', '*=', '/=',
  '%=', '&=', '|=', '^=', '<<', '>>', '->', '::',
  '=', '>', '<', '!', '~', '?', ':', '+', '-', '*', '/', '&', '|', '^', '%',
];
const PUNCTUATION = ['...', '(', ')', '{', '}', '[', ']', ';', ',', '.'];
const SYMBOLS = [...OPERATORS, ...PUNCTUATION].sort((a, b) => b.length - a.length);

const IDENT_START = /[A-Za-z_$]/;
const IDENT_PART = /[A-Za-z0-9_$]/;

function matchNumber(text: string, i: number): number {
  const rest = text.slice(i);
  const float = rest.match(
    /^(?:\d[\d_]*\.[\d_]*(?:[eE][+-]?\d+)?[fFdD]?|\.\d[\d_]*(?:[eE][+-]?\d+)?[fFdD]?|\d[\d_]*[eE][+-]?\d+[fFdD]?|\d[\d_]*[fFdD])/,
  );
  if (float) return i + float[0].length;
  const int = rest.match(/^(?:0[xX][0-9a-fA-F_]+[lL]?|0[bB][01_]+[lL]?|\d[\d_]*[lL]?)/);
  return int ? i + int[0].length : i;
}

function matchQuoted(text: string, i: number, quote: string): number {
  let j = i + 1;
  while (j < text.length) {
    if (text[j] === '\\') {
      j += 2;
      continue;
    }
    if (text[j] === quote) return j + 1;
    if (text[j] === '\n') break;
    j++;
  }
  throw new Error(`unterminated ${quote === '"' ? 'string' : 'char'} literal at ${i}`);
}

export function relex(text: string): string[] {
  const tokens: string[] = [];
  let i = 0;
  outer: while (i < text.length) {
    const c = text[i];
    if (/\s/.test(c)) {
      i++;
      continue;
    }
    if (IDENT_START.test(c)) {
      let j = i + 1;
      while (j < text.length && IDENT_PART.test(text[j])) j++;
      tokens.push(text.slice(i, j));
      i = j;
      continue;
    }
    if (/\d/.test(c) || (c === '.' && /\d/.test(text[i + 1] ?? ''))) {
      const j = matchNumber(text, i);
      tokens.push(text.slice(i, j));
      i = j;
      continue;
    }
    if (c === '"' || c === "'") {
      const j = matchQuoted(text, i, c);
      tokens.push(text.slice(i, j));
      i = j;
      continue;
    }
    if (c === '@') {
      const m = text.slice(i).match(/^@[A-Za-z_$][A-Za-z0-9_$]*(?:\.[A-Za-z_$][A-Za-z0-9_$]*)*/);
      if (m) {
        tokens.push(m[0]);
        i += m[0].length;
        continue;
      }
      throw new Error(`no token starts at ${i}: ${text.slice(i, i + 10)}`);
    }
    for (const sym of SYMBOLS) {
      if (text.startsWith(sym, i)) {
        tokens.push(sym);
        i += sym.length;
        continue outer;
      }
    }
    throw new Error(`no token starts at ${i}: ${text.slice(i, i + 10)}`);
  }
  return tokens;
}
