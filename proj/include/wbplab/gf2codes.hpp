#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace wbplab {

// Dense binary matrix over GF(2), bit-packed into 64-bit words per row.
// Block lengths in this project stay small (N <= 127), so dense storage
// wins over any sparse scheme.
class BitMatrix {
  public:
    BitMatrix() = default;
    BitMatrix(std::size_t rows, std::size_t cols);

    static BitMatrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t words_per_row() const { return wpr_; }

    bool get(std::size_t r, std::size_t c) const {
        return (bits_[r * wpr_ + (c >> 6)] >> (c & 63)) & 1u;
    }
    void set(std::size_t r, std::size_t c, bool v) {
        std::uint64_t& w = bits_[r * wpr_ + (c >> 6)];
        const std::uint64_t m = 1ull << (c & 63);
        w = v ? (w | m) : (w & ~m);
    }

    std::span<const std::uint64_t> row_words(std::size_t r) const {
        return {bits_.data() + r * wpr_, wpr_};
    }
    std::span<std::uint64_t> row_words(std::size_t r) {
        return {bits_.data() + r * wpr_, wpr_};
    }

    // dst_row ^= src_row
    void xor_rows(std::size_t src_row, std::size_t dst_row);
    void swap_rows(std::size_t a, std::size_t b);

    std::size_t row_weight(std::size_t r) const;
    bool row_is_zero(std::size_t r) const;

    std::vector<std::uint8_t> row_bits(std::size_t r) const;
    void set_row_bits(std::size_t r, std::span<const std::uint8_t> bits);

    bool operator==(const BitMatrix& other) const = default;

  private:
    std::size_t rows_ = 0, cols_ = 0, wpr_ = 0;
    std::vector<std::uint64_t> bits_;
};

// Rank under GF(2) Gaussian elimination. Takes a copy as work buffer.
std::size_t gf2_rank(BitMatrix mat);

// Basis of {x : mat . x^T = 0}, one basis vector per row. Deterministic
// (free columns in ascending order).
BitMatrix gf2_nullspace(const BitMatrix& mat);

// mat . x^T over GF(2); x has mat.cols() entries, result has mat.rows().
std::vector<std::uint8_t> gf2_mat_vec(const BitMatrix& mat,
                                      std::span<const std::uint8_t> x);

// FNV-1a content hash over dimensions and packed bits. Used to tie
// checkpoints to the matrix they were trained on.
std::uint64_t matrix_hash(const BitMatrix& mat);

// An (n,k) binary linear code: generator plus a named set of parity-check
// matrix variants ("std", "oc", "cr", ...). Immutable after construction.
struct Code {
    std::size_t n = 0;
    std::size_t k = 0;
    BitMatrix generator;  // k x n, full rank
    std::vector<std::pair<std::string, BitMatrix>> pc_matrices;

    double rate() const { return static_cast<double>(k) / static_cast<double>(n); }

    bool has_pcm(const std::string& name) const;
    const BitMatrix& pcm(const std::string& name) const;
    // "std" when present, otherwise the first stored matrix.
    const BitMatrix& check_matrix() const;
    void add_pcm(std::string name, BitMatrix h);  // validates H . G^T = 0
};

// Code from a full-rank generator; derives and stores the "std" matrix.
Code code_from_generator(BitMatrix generator);

// Code from a parity-check matrix (possibly with redundant rows): the
// generator is a nullspace basis of H. Stores H under the given name.
Code code_from_pcm(std::string name, BitMatrix h);

// Reed-Muller RM(r,m) generator: rows are evaluations of the monomials of
// degree <= r over all points of GF(2)^m in binary counting order, grouped
// by ascending degree (so RM(r,m) rows are a prefix of RM(r+1,m) rows).
BitMatrix rm_generator(unsigned r, unsigned m);

// (n-k) x n parity-check matrix with H . G^T = 0, built by column-permuted
// systematic reduction of the generator; the permutation is undone so bit
// order matches the generator.
BitMatrix standard_pcm(const BitMatrix& generator);

// All dual codewords of minimum nonzero weight, one per row, sorted
// lexicographically by bit pattern (column 0 most significant).
// Requires n - k <= 24 so the 2^(n-k) dual words can be enumerated.
BitMatrix enumerate_min_weight_dual(const Code& code);

std::vector<std::uint8_t> encode(const Code& code,
                                 std::span<const std::uint8_t> message);
bool is_codeword(const Code& code, std::span<const std::uint8_t> word);

// alist interchange format:
//   line 1: "N M" (columns, rows); line 2: max column / row degree;
//   then per-column degrees, per-row degrees, per-column 1-based row
//   indices, per-row 1-based column indices. Zero entries are padding and
//   are skipped. The two index sections are cross-validated.
BitMatrix parse_alist(std::istream& in);
BitMatrix parse_alist_file(const std::string& path);
void write_alist(std::ostream& out, const BitMatrix& h);
void write_alist_file(const std::string& path, const BitMatrix& h);

}  // namespace wbplab
