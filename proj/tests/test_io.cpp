// Copyright 2026 The haarlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "haarlab/ensembles.hpp"
#include "haarlab/matrix.hpp"

namespace {

using namespace haarlab;

TEST(MatrixJson, RoundTripIsExact) {
    RngStream s(12, 0);
    const ComplexMatrix u = haar_unitary(s, 6);
    const auto text = matrix_to_json(u).dump();
    EXPECT_EQ(matrix_from_json(nlohmann::json::parse(text)), u);
}

TEST(MatrixJson, RowMajorLayout) {
    ComplexMatrix m(2, 2);
    m << Complex(1, 2), Complex(3, 4), Complex(5, 6), Complex(7, 8);
    const auto j = matrix_to_json(m);
    EXPECT_EQ(j.at("rows"), 2);
    EXPECT_EQ(j.at("entries")[1][0].get<double>(), 3.0);
    EXPECT_EQ(j.at("entries")[2][1].get<double>(), 6.0);
}

TEST(MatrixJson, RejectsMalformed) {
    EXPECT_THROW(matrix_from_json(nlohmann::json::parse(
                     R"({"rows":2,"cols":2,"entries":[[1,0],[0,0],[0,0]]})")),
                 std::invalid_argument);
    EXPECT_THROW(matrix_from_json(nlohmann::json::parse(R"({"rows":1,"cols":1,"entries":[[1]]})")),
                 std::invalid_argument);
    EXPECT_THROW(matrix_from_json(nlohmann::json::parse(R"({"rows":1})")), nlohmann::json::exception);
}

TEST(MatrixBinary, RoundTripAndLayout) {
    RngStream s(13, 0);
    const ComplexMatrix u = haar_unitary_qr(s, 5);
    std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
    write_matrix_binary(buf, u);
    write_matrix_binary(buf, u.topRows(2));
    const std::string bytes = buf.str();
    ASSERT_EQ(bytes.size(), 16u + 25u * 16u + 16u + 10u * 16u);
    // little-endian uint64 row count first
    EXPECT_EQ(static_cast<unsigned char>(bytes[0]), 5u);
    for (int b = 1; b < 8; ++b) {
        EXPECT_EQ(bytes[static_cast<std::size_t>(b)], '\0');
    }
    EXPECT_EQ(read_matrix_binary(buf), u);
    EXPECT_EQ(read_matrix_binary(buf), u.topRows(2));
    EXPECT_THROW(read_matrix_binary(buf), std::runtime_error);
}

TEST(MatrixBinary, TruncatedInputThrows) {
    RngStream s(14, 0);
    std::stringstream buf;
    write_matrix_binary(buf, haar_unitary(s, 3));
    std::string bytes = buf.str();
    bytes.resize(bytes.size() - 5);
    std::istringstream in(bytes);
    EXPECT_THROW(read_matrix_binary(in), std::runtime_error);
}

}  // namespace
