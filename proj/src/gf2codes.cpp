#include "wbplab/gf2codes.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "wbplab/errors.hpp"

namespace wbplab {

BitMatrix::BitMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), wpr_((cols + 63) / 64), bits_(rows * wpr_, 0) {
    if (rows == 0 || cols == 0)
        throw ParamError("BitMatrix dimensions must be positive");
}

BitMatrix BitMatrix::identity(std::size_t n) {
    BitMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, true);
    return m;
}

void BitMatrix::xor_rows(std::size_t src_row, std::size_t dst_row) {
    std::uint64_t* dst = bits_.data() + dst_row * wpr_;
    const std::uint64_t* src = bits_.data() + src_row * wpr_;
    for (std::size_t w = 0; w < wpr_; ++w) dst[w] ^= src[w];
}

void BitMatrix::swap_rows(std::size_t a, std::size_t b) {
    if (a == b) return;
    std::swap_ranges(bits_.begin() + a * wpr_, bits_.begin() + (a + 1) * wpr_,
                     bits_.begin() + b * wpr_);
}

std::size_t BitMatrix::row_weight(std::size_t r) const {
    std::size_t w = 0;
    for (std::uint64_t word : row_words(r)) w += std::popcount(word);
    return w;
}

bool BitMatrix::row_is_zero(std::size_t r) const {
    for (std::uint64_t word : row_words(r))
        if (word) return false;
    return true;
}

std::vector<std::uint8_t> BitMatrix::row_bits(std::size_t r) const {
    std::vector<std::uint8_t> out(cols_);
    for (std::size_t c = 0; c < cols_; ++c) out[c] = get(r, c);
    return out;
}

void BitMatrix::set_row_bits(std::size_t r, std::span<const std::uint8_t> bits) {
    for (std::size_t c = 0; c < cols_; ++c) set(r, c, bits[c] & 1);
}

namespace {

// Gaussian elimination in place; returns pivot columns. When `reduce` is
// set the result is in reduced row echelon form.
std::vector<std::size_t> eliminate(BitMatrix& m, bool reduce) {
    std::vector<std::size_t> pivots;
    std::size_t row = 0;
    for (std::size_t col = 0; col < m.cols() && row < m.rows(); ++col) {
        std::size_t pivot = row;
        while (pivot < m.rows() && !m.get(pivot, col)) ++pivot;
        if (pivot == m.rows()) continue;
        m.swap_rows(pivot, row);
        for (std::size_t r = reduce ? 0 : row + 1; r < m.rows(); ++r)
            if (r != row && m.get(r, col)) m.xor_rows(row, r);
        pivots.push_back(col);
        ++row;
    }
    return pivots;
}

}  // namespace

std::size_t gf2_rank(BitMatrix mat) { return eliminate(mat, false).size(); }

BitMatrix gf2_nullspace(const BitMatrix& mat) {
    BitMatrix work = mat;
    const std::vector<std::size_t> pivots = eliminate(work, true);
    std::vector<std::size_t> free_cols;
    for (std::size_t c = 0, p = 0; c < mat.cols(); ++c) {
        if (p < pivots.size() && pivots[p] == c)
            ++p;
        else
            free_cols.push_back(c);
    }
    if (free_cols.empty())
        throw StructuralError("matrix has trivial nullspace");
    BitMatrix basis(free_cols.size(), mat.cols());
    for (std::size_t i = 0; i < free_cols.size(); ++i) {
        const std::size_t f = free_cols[i];
        basis.set(i, f, true);
        for (std::size_t p = 0; p < pivots.size(); ++p)
            if (work.get(p, f)) basis.set(i, pivots[p], true);
    }
    return basis;
}

std::vector<std::uint8_t> gf2_mat_vec(const BitMatrix& mat,
                                      std::span<const std::uint8_t> x) {
    if (x.size() != mat.cols())
        throw ParamError("gf2_mat_vec: vector length mismatch");
    std::vector<std::uint64_t> packed((mat.cols() + 63) / 64, 0);
    for (std::size_t c = 0; c < mat.cols(); ++c)
        if (x[c] & 1) packed[c >> 6] |= 1ull << (c & 63);
    std::vector<std::uint8_t> out(mat.rows());
    for (std::size_t r = 0; r < mat.rows(); ++r) {
        std::uint64_t acc = 0;
        auto row = mat.row_words(r);
        for (std::size_t w = 0; w < row.size(); ++w)
            acc ^= row[w] & packed[w];
        out[r] = std::popcount(acc) & 1;
    }
    return out;
}

std::uint64_t matrix_hash(const BitMatrix& mat) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xff;
            h *= 0x100000001b3ull;
        }
    };
    mix(mat.rows());
    mix(mat.cols());
    for (std::size_t r = 0; r < mat.rows(); ++r)
        for (std::uint64_t w : mat.row_words(r)) mix(w);
    return h;
}

bool Code::has_pcm(const std::string& name) const {
    for (const auto& [n, h] : pc_matrices)
        if (n == name) return true;
    return false;
}

const BitMatrix& Code::pcm(const std::string& name) const {
    for (const auto& [n, h] : pc_matrices)
        if (n == name) return h;
    throw ParamError("no parity-check matrix named '" + name + "'");
}

const BitMatrix& Code::check_matrix() const {
    if (pc_matrices.empty())
        throw StructuralError("code has no parity-check matrix");
    for (const auto& [n, h] : pc_matrices)
        if (n == "std") return h;
    return pc_matrices.front().second;
}

void Code::add_pcm(std::string name, BitMatrix h) {
    if (h.cols() != n) throw ParamError("parity-check matrix width != n");
    for (std::size_t r = 0; r < k; ++r) {
        const auto row = generator.row_bits(r);
        for (std::uint8_t bit : gf2_mat_vec(h, row))
            if (bit)
                throw StructuralError("H . G^T != 0 for matrix '" + name + "'");
    }
    pc_matrices.emplace_back(std::move(name), std::move(h));
}

Code code_from_generator(BitMatrix generator) {
    Code code;
    code.k = generator.rows();
    code.n = generator.cols();
    if (gf2_rank(generator) != code.k)
        throw StructuralError("generator is rank deficient");
    BitMatrix h = standard_pcm(generator);
    code.generator = std::move(generator);
    code.add_pcm("std", std::move(h));
    return code;
}

Code code_from_pcm(std::string name, BitMatrix h) {
    Code code;
    code.n = h.cols();
    code.generator = gf2_nullspace(h);
    code.k = code.generator.rows();
    code.add_pcm(std::move(name), std::move(h));
    return code;
}

BitMatrix rm_generator(unsigned r, unsigned m) {
    if (r > m || m > 10)
        throw ParamError("rm_generator requires 0 <= r <= m <= 10");
    const std::size_t n = 1ull << m;
    std::vector<unsigned> masks;  // one monomial per row, grouped by degree
    for (unsigned deg = 0; deg <= r; ++deg)
        for (unsigned mask = 0; mask < n; ++mask)
            if (static_cast<unsigned>(std::popcount(mask)) == deg)
                masks.push_back(mask);
    BitMatrix g(masks.size(), n);
    for (std::size_t row = 0; row < masks.size(); ++row)
        for (std::size_t point = 0; point < n; ++point)
            if ((point & masks[row]) == masks[row]) g.set(row, point, true);
    return g;
}

BitMatrix standard_pcm(const BitMatrix& generator) {
    const std::size_t k = generator.rows();
    const std::size_t n = generator.cols();
    BitMatrix work = generator;
    // Greedy pivot selection records which columns carry the identity part.
    std::vector<std::size_t> pivot_cols;
    std::size_t row = 0;
    for (std::size_t col = 0; col < n && row < k; ++col) {
        std::size_t pivot = row;
        while (pivot < k && !work.get(pivot, col)) ++pivot;
        if (pivot == k) continue;
        work.swap_rows(pivot, row);
        for (std::size_t rr = 0; rr < k; ++rr)
            if (rr != row && work.get(rr, col)) work.xor_rows(row, rr);
        pivot_cols.push_back(col);
        ++row;
    }
    if (pivot_cols.size() != k)
        throw StructuralError("standard_pcm: generator is rank deficient");
    if (n == k)
        throw StructuralError("standard_pcm: code has no parity constraints");
    std::vector<std::size_t> free_cols;
    {
        std::size_t p = 0;
        for (std::size_t c = 0; c < n; ++c) {
            if (p < pivot_cols.size() && pivot_cols[p] == c)
                ++p;
            else
                free_cols.push_back(c);
        }
    }
    // In permuted coordinates G = [I | A]; then H = [A^T | I], mapped back
    // through the recorded column choice.
    BitMatrix h(n - k, n);
    for (std::size_t i = 0; i < free_cols.size(); ++i) {
        h.set(i, free_cols[i], true);
        for (std::size_t j = 0; j < k; ++j)
            if (work.get(j, free_cols[i])) h.set(i, pivot_cols[j], true);
    }
    return h;
}

namespace {

// Lexicographic order on bit patterns, column 0 most significant.
bool lex_less(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
    for (std::size_t w = 0; w < a.size(); ++w) {
        const std::uint64_t diff = a[w] ^ b[w];
        if (diff) {
            const int k = std::countr_zero(diff);
            return !((a[w] >> k) & 1);  // first differing column: 0 sorts first
        }
    }
    return false;
}

}  // namespace

BitMatrix enumerate_min_weight_dual(const Code& code) {
    const std::size_t dual_dim = code.n - code.k;
    if (dual_dim > 24)
        throw FeasibilityError("dual dimension " + std::to_string(dual_dim) +
                               " too large for exhaustive enumeration");
    if (dual_dim == 0)
        throw StructuralError("dual code is trivial");
    const BitMatrix basis = gf2_nullspace(code.generator);
    const std::size_t words = basis.words_per_row();
    std::vector<std::uint64_t> current(words, 0);
    std::size_t best = SIZE_MAX;
    std::vector<std::vector<std::uint64_t>> hits;
    // Gray-code walk over all 2^dim combinations: step i toggles basis row
    // ctz(i), so each dual codeword costs O(words).
    const std::uint64_t total = 1ull << dual_dim;
    for (std::uint64_t i = 1; i < total; ++i) {
        const std::size_t toggled = std::countr_zero(i);
        auto row = basis.row_words(toggled);
        std::size_t weight = 0;
        for (std::size_t w = 0; w < words; ++w) {
            current[w] ^= row[w];
            weight += std::popcount(current[w]);
        }
        if (weight < best) {
            best = weight;
            hits.clear();
        }
        if (weight == best) hits.push_back(current);
    }
    std::sort(hits.begin(), hits.end(),
              [](const auto& a, const auto& b) { return lex_less(a, b); });
    BitMatrix out(hits.size(), code.n);
    for (std::size_t r = 0; r < hits.size(); ++r)
        std::copy(hits[r].begin(), hits[r].end(), out.row_words(r).begin());
    return out;
}

std::vector<std::uint8_t> encode(const Code& code,
                                 std::span<const std::uint8_t> message) {
    if (message.size() != code.k)
        throw ParamError("encode: message length != k");
    std::vector<std::uint64_t> acc(code.generator.words_per_row(), 0);
    for (std::size_t i = 0; i < code.k; ++i) {
        if (!(message[i] & 1)) continue;
        auto row = code.generator.row_words(i);
        for (std::size_t w = 0; w < acc.size(); ++w) acc[w] ^= row[w];
    }
    std::vector<std::uint8_t> out(code.n);
    for (std::size_t c = 0; c < code.n; ++c)
        out[c] = (acc[c >> 6] >> (c & 63)) & 1;
    return out;
}

bool is_codeword(const Code& code, std::span<const std::uint8_t> word) {
    if (word.size() != code.n)
        throw ParamError("is_codeword: word length != n");
    for (std::uint8_t bit : gf2_mat_vec(code.check_matrix(), word))
        if (bit) return false;
    return true;
}

namespace {

// Whitespace-delimited integer reader that tracks line numbers for
// diagnostics.
class TokenReader {
  public:
    explicit TokenReader(std::istream& in) : in_(in) {}

    long next(const char* what) {
        skip_space();
        long value;
        if (!(in_ >> value))
            throw ParseError(std::string("expected ") + what, line_);
        return value;
    }

    std::size_t next_count(const char* what) {
        const long v = next(what);
        if (v < 0) throw ParseError(std::string(what) + " must be >= 0", line_);
        return static_cast<std::size_t>(v);
    }

    std::size_t line() const { return line_; }

  private:
    void skip_space() {
        int ch;
        while ((ch = in_.peek()) != EOF &&
               (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n')) {
            if (ch == '\n') ++line_;
            in_.get();
        }
    }

    std::istream& in_;
    std::size_t line_ = 1;
};

}  // namespace

BitMatrix parse_alist(std::istream& in) {
    TokenReader tok(in);
    const std::size_t n = tok.next_count("column count N");
    const std::size_t m = tok.next_count("row count M");
    if (n == 0 || m == 0) throw ParseError("empty matrix", tok.line());
    const std::size_t max_col = tok.next_count("max column degree");
    const std::size_t max_row = tok.next_count("max row degree");

    std::vector<std::size_t> col_deg(n), row_deg(m);
    for (std::size_t c = 0; c < n; ++c) {
        col_deg[c] = tok.next_count("column degree");
        if (col_deg[c] > max_col)
            throw ParseError("column degree exceeds declared maximum", tok.line());
    }
    for (std::size_t r = 0; r < m; ++r) {
        row_deg[r] = tok.next_count("row degree");
        if (row_deg[r] > max_row)
            throw ParseError("row degree exceeds declared maximum", tok.line());
    }

    BitMatrix h(m, n);
    // Column lists. Zero entries are padding (the padded dialect fills each
    // list up to the maximum degree), so read nonzero indices until the
    // declared degree is met.
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t seen = 0;
        while (seen < col_deg[c]) {
            const long idx = tok.next("row index");
            if (idx == 0) continue;  // padding
            if (idx < 0 || static_cast<std::size_t>(idx) > m)
                throw ParseError("row index out of range", tok.line());
            h.set(static_cast<std::size_t>(idx) - 1, c, true);
            ++seen;
        }
    }
    // Row lists, cross-validated against the column section.
    BitMatrix check(m, n);
    for (std::size_t r = 0; r < m; ++r) {
        std::size_t seen = 0;
        while (seen < row_deg[r]) {
            const long idx = tok.next("column index");
            if (idx == 0) continue;  // padding
            if (idx < 0 || static_cast<std::size_t>(idx) > n)
                throw ParseError("column index out of range", tok.line());
            check.set(r, static_cast<std::size_t>(idx) - 1, true);
            ++seen;
        }
    }
    if (!(h == check))
        throw ParseError("column lists and row lists describe different matrices",
                         tok.line());
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t w = 0;
        for (std::size_t r = 0; r < m; ++r) w += h.get(r, c);
        if (w != col_deg[c])
            throw ParseError("column degree inconsistent with index lists",
                             tok.line());
    }
    return h;
}

BitMatrix parse_alist_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParamError("cannot open alist file: " + path);
    return parse_alist(in);
}

void write_alist(std::ostream& out, const BitMatrix& h) {
    const std::size_t m = h.rows(), n = h.cols();
    std::vector<std::vector<std::size_t>> cols(n), rows(m);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < n; ++c)
            if (h.get(r, c)) {
                cols[c].push_back(r + 1);
                rows[r].push_back(c + 1);
            }
    std::size_t max_col = 0, max_row = 0;
    for (const auto& v : cols) max_col = std::max(max_col, v.size());
    for (const auto& v : rows) max_row = std::max(max_row, v.size());

    auto write_list = [&out](const std::vector<std::size_t>& v) {
        for (std::size_t i = 0; i < v.size(); ++i)
            out << (i ? " " : "") << v[i];
        out << "\n";
    };
    out << n << " " << m << "\n" << max_col << " " << max_row << "\n";
    for (std::size_t c = 0; c < n; ++c)
        out << (c ? " " : "") << cols[c].size();
    out << "\n";
    for (std::size_t r = 0; r < m; ++r)
        out << (r ? " " : "") << rows[r].size();
    out << "\n";
    for (const auto& v : cols) write_list(v);
    for (const auto& v : rows) write_list(v);
}

void write_alist_file(const std::string& path, const BitMatrix& h) {
    std::ofstream out(path);
    if (!out) throw ParamError("cannot open output file: " + path);
    write_alist(out, h);
}

}  // namespace wbplab
