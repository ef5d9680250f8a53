#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <tuple>

#include "rss/matrix.hpp"

namespace rss {

// Matrix Market readers/writers. Coordinate and array formats, real entries,
// general or symmetric symmetry, 1-based indices.

namespace mmio_detail {

struct Header {
    bool coordinate = false;
    bool symmetric = false;
};

inline Header read_header(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw InvalidInput("matrix market: empty file");
    std::istringstream hs(line);
    std::string banner, object, format, field, symmetry;
    hs >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket" || object != "matrix")
        throw InvalidInput("matrix market: missing %%MatrixMarket matrix header");
    Header h;
    if (format == "coordinate")
        h.coordinate = true;
    else if (format != "array")
        throw InvalidInput("matrix market: unsupported format " + format);
    if (field != "real" && field != "integer" && field != "double")
        throw InvalidInput("matrix market: unsupported field " + field);
    if (symmetry == "symmetric")
        h.symmetric = true;
    else if (symmetry != "general")
        throw InvalidInput("matrix market: unsupported symmetry " + symmetry);
    return h;
}

inline std::string next_data_line(std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
        size_t pos = line.find_first_not_of(" \t\r");
        if (pos == std::string::npos || line[pos] == '%') continue;
        return line;
    }
    throw InvalidInput("matrix market: unexpected end of file");
}

} // namespace mmio_detail

struct MmHeader {
    bool coordinate = false;
    bool symmetric = false;
};

inline MmHeader peek_mm_header(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open " + path);
    auto h = mmio_detail::read_header(in);
    return {h.coordinate, h.symmetric};
}

inline SparseMatrix read_mm_sparse(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open " + path);
    auto h = mmio_detail::read_header(in);
    if (!h.coordinate) throw InvalidInput("matrix market: expected coordinate format");
    std::istringstream sz(mmio_detail::next_data_line(in));
    index_t rows, cols, nnz;
    sz >> rows >> cols >> nnz;
    std::vector<std::tuple<index_t, index_t, double>> trip;
    trip.reserve(static_cast<size_t>(nnz));
    for (index_t k = 0; k < nnz; ++k) {
        std::istringstream ls(mmio_detail::next_data_line(in));
        index_t i, j;
        double v;
        ls >> i >> j >> v;
        trip.emplace_back(i - 1, j - 1, v);
        if (h.symmetric && i != j) trip.emplace_back(j - 1, i - 1, v);
    }
    return SparseMatrix::from_triplets(rows, cols, std::move(trip));
}

inline DenseMatrix read_mm_dense(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open " + path);
    auto h = mmio_detail::read_header(in);
    if (h.coordinate) return read_mm_sparse(path).densify();
    std::istringstream sz(mmio_detail::next_data_line(in));
    index_t rows, cols;
    sz >> rows >> cols;
    DenseMatrix A(rows, cols);
    for (index_t j = 0; j < cols; ++j)
        for (index_t i = (h.symmetric ? j : 0); i < rows; ++i) {
            std::istringstream ls(mmio_detail::next_data_line(in));
            double v;
            ls >> v;
            A(i, j) = v;
            if (h.symmetric) A(j, i) = v;
        }
    return A;
}

inline Vector read_mm_vector(const std::string& path) {
    DenseMatrix A = read_mm_dense(path);
    if (A.cols != 1) throw InvalidInput("matrix market: expected a single-column array");
    return A.a;
}

inline void write_mm_dense(const std::string& path, const DenseMatrix& A) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot open " + path + " for writing");
    out << "%%MatrixMarket matrix array real general\n";
    out << A.rows << " " << A.cols << "\n";
    out.precision(17);
    for (index_t j = 0; j < A.cols; ++j)
        for (index_t i = 0; i < A.rows; ++i) out << A(i, j) << "\n";
}

inline void write_mm_sparse(const std::string& path, const SparseMatrix& A) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot open " + path + " for writing");
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << A.rows << " " << A.cols << " " << A.nnz() << "\n";
    out.precision(17);
    for (index_t i = 0; i < A.rows; ++i)
        for (index_t k = A.row_ptr[static_cast<size_t>(i)]; k < A.row_ptr[static_cast<size_t>(i) + 1]; ++k)
            out << (i + 1) << " " << (A.col_idx[static_cast<size_t>(k)] + 1) << " "
                << A.val[static_cast<size_t>(k)] << "\n";
}

} // namespace rss
