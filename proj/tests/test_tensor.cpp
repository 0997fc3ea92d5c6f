#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace ctd;

namespace {

DenseTensor<double> iota(const Dims& dims)
{
	DenseTensor<double> x(dims);
	for (Index i = 0; i < x.size(); ++i)
		x[i] = static_cast<double>(i + 1);
	return x;
}

Matrix<double> mat(Index r, Index c, std::initializer_list<double> v)
{
	Matrix<double> m(r, c);
	auto it = v.begin();
	for (Index i = 0; i < r; ++i)
		for (Index j = 0; j < c; ++j)
			m(i, j) = *it++;
	return m;
}

}  // namespace

TEST(LinearIndex, FirstAndLast)
{
	EXPECT_EQ(linear_index({2, 3, 4}, {1, 1, 1}), 1);
	EXPECT_EQ(linear_index({2, 3, 4}, {2, 3, 4}), 24);
}

TEST(LinearIndex, FrozenInteriorPosition)
{
	EXPECT_EQ(linear_index({2, 3, 4}, {1, 2, 3}), 7);
	EXPECT_EQ(oracle::enumerate_position({2, 3, 4}, {1, 2, 3}), 7);
}

TEST(LinearIndex, MatchesEnumerationEverywhere)
{
	oracle::Gen g(11);
	for (int t = 0; t < 20; ++t) {
		const Dims d = g.dims(static_cast<int>(g.uniform(1, 4)), 1, 4);
		Index pos = 0;
		oracle::for_each_index(d, [&](const Dims& idx) {
			++pos;
			ASSERT_EQ(linear_index(d, idx), pos);
			ASSERT_EQ(multi_index(d, pos), idx);
		});
	}
}

TEST(LinearIndex, OutOfRangeNamesMode)
{
	try {
		linear_index({2, 3, 4}, {1, 4, 1});
		FAIL();
	} catch (const BoundsError& e) {
		EXPECT_NE(std::string(e.what()).find("mode 2"), std::string::npos);
	}
	EXPECT_THROW(linear_index({2, 3}, {1, 1, 1}), ShapeError);
}

TEST(Vectorize, OrderOneAndIdentity)
{
	const DenseTensor<double> v({3}, {4, 5, 6});
	EXPECT_EQ(vectorize(v), (Vector<double>(3) << 4, 5, 6).finished());
	EXPECT_EQ(vectorize(identity_tensor<double>(2, 2)), (Vector<double>(4) << 1, 0, 0, 1).finished());
	EXPECT_EQ(vectorize(identity_tensor<double>(3, 2)), (Vector<double>(8) << 1, 0, 0, 0, 0, 0, 0, 1).finished());
}

TEST(Vectorize, MatchesEnumerationOracle)
{
	oracle::Gen g(3);
	const auto x = g.tensor<double>({2, 3, 2});
	const auto v = vectorize(x);
	oracle::for_each_index(x.dims(), [&](const Dims& idx) {
		EXPECT_EQ(v(oracle::enumerate_position(x.dims(), idx) - 1), x.at(idx));
	});
}

TEST(Matricize, FlatModeOneOfKnownTensor)
{
	const auto x = iota({2, 2, 2});
	EXPECT_EQ(matricize(x, {{1}, {2, 3}}), mat(2, 4, {1, 2, 3, 4, 5, 6, 7, 8}));
	// cyclic mode-2 unfolding: columns ordered (k, i)
	EXPECT_EQ(unfold(x, 2), mat(2, 4, {1, 5, 2, 6, 3, 7, 4, 8}));
	EXPECT_EQ(matricize(x, {{2, 3}, {1}}), matricize(x, {{1}, {2, 3}}).transpose());
}

TEST(Matricize, FlatModeOneEqualsTransposedLateralSlices)
{
	oracle::Gen g(5);
	const auto x = g.tensor<double>({3, 4, 2});
	const Matrix<double> x1 = unfold(x, 1);
	for (Index j = 1; j <= 4; ++j) {
		// lateral slice X_{.j.} is K x I
		const auto s = slice(x, {{2, j}});
		ASSERT_EQ(s.dims(), (Dims{2, 3}));
		const Matrix<double> sm = matricize(s, {{1}, {2}});
		EXPECT_EQ(x1.middleCols((j - 1) * 2, 2), sm.transpose());
	}
}

TEST(Matricize, ThreeWayEntryFormula)
{
	oracle::Gen g(6);
	const auto x = g.tensor<double>({2, 3, 4});
	const auto m = unfold(x, 1);
	oracle::for_each_index(x.dims(), [&](const Dims& i) {
		EXPECT_EQ(m(i[0] - 1, (i[1] - 1) * 4 + i[2] - 1), x.at(i));
	});
}

TEST(Matricize, AgreesWithOracleOnRandomPartitions)
{
	oracle::Gen g(7);
	for (int t = 0; t < 50; ++t) {
		const int order = static_cast<int>(g.uniform(2, 5));
		const auto x = g.tensor<double>(g.dims(order, 1, 3));
		const auto p = g.partition(order);
		ASSERT_EQ(matricize(x, p), oracle::matricize(x, p.s1, p.s2));
	}
}

TEST(Matricize, InvalidPartitionThrows)
{
	const auto x = iota({2, 2, 2});
	EXPECT_THROW(matricize(x, {{1}, {2}}), PartitionError);
	EXPECT_THROW(matricize(x, {{1, 1}, {2, 3}}), PartitionError);
	EXPECT_THROW(matricize(x, {{}, {1, 2, 3}}), PartitionError);
	EXPECT_THROW(matricize(x, {{1, 2, 3}, {}}), PartitionError);
	EXPECT_THROW(matricize(x, {{4}, {1, 2, 3}}), PartitionError);
}

TEST(ElementFromUnfolding, FourWayRoundTrip)
{
	oracle::Gen g(8);
	const auto x = g.tensor<double>({2, 3, 2, 3});
	const ModePartition p{{2, 4}, {1, 3}};
	const auto m = matricize(x, p);
	oracle::for_each_index(x.dims(), [&](const Dims& i) { EXPECT_EQ(element_from_unfolding(m, p, x.dims(), i), x.at(i)); });
	EXPECT_THROW(element_from_unfolding(Matrix<double>(m.transpose()), p, x.dims(), Dims{1, 1, 1, 1}), ShapeError);
}

TEST(Refold, InverseOfMatricize)
{
	oracle::Gen g(9);
	for (int t = 0; t < 30; ++t) {
		const int order = static_cast<int>(g.uniform(2, 5));
		const auto x = g.tensor<Complex>(g.dims(order, 1, 3));
		const auto p = g.partition(order);
		ASSERT_EQ(refold(matricize(x, p), p, x.dims()), x);
	}
}

TEST(Refold, DegenerateRowAndTransposedLayout)
{
	const Matrix<double> row = mat(1, 3, {1, 2, 3});
	const auto y = refold(row, {{1}, {2}}, {1, 3});
	EXPECT_EQ(y.dims(), (Dims{1, 3}));
	EXPECT_EQ(y.at({1, 2}), 2);
	const auto x = iota({2, 3, 2});
	const ModePartition p{{2, 3}, {1}};
	EXPECT_EQ(refold(matricize(x, p), p, x.dims()), x);
	EXPECT_THROW(refold(row, {{1}, {2}}, {3, 1}), ShapeError);
}

TEST(Slice, SingleModeFollowsCyclicOrder)
{
	oracle::Gen g(10);
	const auto x = g.tensor<double>({2, 3, 4});
	const auto frontal = slice(x, {{3, 2}});
	ASSERT_EQ(frontal.dims(), (Dims{2, 3}));
	const auto lateral = slice(x, {{2, 3}});
	ASSERT_EQ(lateral.dims(), (Dims{4, 2}));
	const auto horizontal = slice(x, {{1, 2}});
	ASSERT_EQ(horizontal.dims(), (Dims{3, 4}));
	for (Index i = 1; i <= 2; ++i)
		for (Index j = 1; j <= 3; ++j)
			for (Index k = 1; k <= 4; ++k) {
				if (k == 2)
					EXPECT_EQ(frontal.at({i, j}), x.at({i, j, k}));
				if (j == 3)
					EXPECT_EQ(lateral.at({k, i}), x.at({i, j, k}));
				if (i == 2)
					EXPECT_EQ(horizontal.at({j, k}), x.at({i, j, k}));
			}
}

TEST(Slice, TwoFixedModesKeepAscendingOrder)
{
	oracle::Gen g(12);
	const auto x = g.tensor<double>({2, 3, 4, 2});
	const auto s = slice(x, {{1, 2}, {3, 4}});
	ASSERT_EQ(s.dims(), (Dims{3, 2}));
	for (Index j = 1; j <= 3; ++j)
		for (Index l = 1; l <= 2; ++l)
			EXPECT_EQ(s.at({j, l}), x.at({2, j, 4, l}));
	EXPECT_THROW(slice(x, {{1, 1}, {2, 1}, {3, 1}, {4, 1}}), PartitionError);
	EXPECT_THROW(slice(x, {{2, 4}}), BoundsError);
}

TEST(ModeProduct, IdentityCompositionCommutation)
{
	oracle::Gen g(13);
	const auto x = g.tensor<double>({3, 4, 2});
	EXPECT_EQ(mode_n_product(x, eye<double>(4), 2), x);
	const auto a = g.matrix(5, 4), b = g.matrix(3, 5), c = g.matrix(2, 3);
	EXPECT_LE(relative_error(mode_n_product(mode_n_product(x, a, 2), b, 2), mode_n_product(x, Matrix<double>(b * a), 2)),
	          1e-12);
	EXPECT_LE(relative_error(mode_n_product(mode_n_product(x, c, 1), a, 2), mode_n_product(mode_n_product(x, a, 2), c, 1)),
	          1e-12);
	EXPECT_THROW(mode_n_product(x, a, 1), ShapeError);
}

TEST(ModeProduct, ActsOnFlatUnfolding)
{
	oracle::Gen g(14);
	for (int t = 0; t < 20; ++t) {
		const int order = static_cast<int>(g.uniform(2, 4));
		const auto x = g.tensor<double>(g.dims(order, 1, 3));
		const int n = static_cast<int>(g.uniform(1, order));
		const auto a = g.matrix(g.uniform(1, 4), x.dim(n));
		const auto y = mode_n_product(x, a, n);
		ASSERT_LE(relative_error(unfold(y, n), Matrix<double>(a * unfold(x, n))), 1e-12);
	}
}

TEST(ModeVectorProduct, CanonicalVectorGivesSlice)
{
	oracle::Gen g(15);
	const auto x = g.tensor<double>({2, 3, 4});
	Vector<double> e = Vector<double>::Zero(3);
	e(1) = 1;
	const auto y = mode_n_vector_product(x, e.transpose(), 2);
	// ascending remaining modes (1, 3)
	ASSERT_EQ(y.dims(), (Dims{2, 4}));
	for (Index i = 1; i <= 2; ++i)
		for (Index k = 1; k <= 4; ++k)
			EXPECT_EQ(y.at({i, k}), x.at({i, 2, k}));
}

TEST(ModeVectorProduct, FullContractionAndSummationOracle)
{
	oracle::Gen g(16);
	const auto x = g.tensor<double>({2, 3, 2});
	auto e = [](Index n, Index i) {
		Vector<double> v = Vector<double>::Zero(n);
		v(i - 1) = 1;
		return v;
	};
	auto y = mode_n_vector_product(x, e(2, 2).transpose(), 1);
	y = mode_n_vector_product(y, e(3, 3).transpose(), 1);
	y = mode_n_vector_product(y, e(2, 1).transpose(), 1);
	EXPECT_EQ(y.size(), 1);
	EXPECT_EQ(y[0], x.at({2, 3, 1}));

	const auto u = g.vector(3);
	const auto z = mode_n_vector_product(x, u.transpose(), 2);
	for (Index i = 1; i <= 2; ++i)
		for (Index k = 1; k <= 2; ++k) {
			double s = 0;
			for (Index j = 1; j <= 3; ++j)
				s += u(j - 1) * x.at({i, j, k});
			EXPECT_NEAR(z.at({i, k}), s, 1e-14);
		}
	EXPECT_THROW(mode_n_vector_product(x, g.vector(2).transpose(), 2), ShapeError);
}

TEST(HadamardCommonModes, FrozenExample)
{
	const DenseTensor<double> a({2, 2}, {1, 2, 3, 4});
	const DenseTensor<double> b({2, 2}, {5, 6, 7, 8});
	const auto c = hadamard_common_modes(a, b, 1);
	ASSERT_EQ(c.dims(), (Dims{2, 2, 2}));
	EXPECT_EQ(matricize(c, {{1}, {2, 3}}), mat(2, 4, {5, 6, 10, 12, 21, 24, 28, 32}));
}

TEST(HadamardCommonModes, OnesReplicateAndMatrixIdentity)
{
	oracle::Gen g(17);
	const auto a = g.tensor<double>({2, 3, 2});  // R1 R2 I1
	const DenseTensor<double> ones3({2, 3, 4}, std::vector<double>(24, 1.0));
	const auto c = hadamard_common_modes(a, ones3, 2);
	ASSERT_EQ(c.dims(), (Dims{2, 3, 2, 4}));
	oracle::for_each_index(c.dims(), [&](const Dims& i) { EXPECT_EQ(c.at(i), a.at({i[0], i[1], i[2]})); });

	const auto b = g.tensor<double>({2, 3, 4});
	const auto h = hadamard_common_modes(a, b, 2);
	const Matrix<double> am = matricize(a, {{1, 2}, {3}}), bm = matricize(b, {{1, 2}, {3}});
	const Matrix<double> lhs = matricize(h, {{1, 2}, {3, 4}});
	const Matrix<double> rhs =
	    (am * kron(eye<double>(2), ones<double>(1, 4))).cwiseProduct(bm * kron(ones<double>(1, 2), eye<double>(4)));
	EXPECT_LE(relative_error(lhs, rhs), 1e-15);
	EXPECT_THROW(hadamard_common_modes(a, g.tensor<double>({3, 3, 2}), 2), ShapeError);
}

TEST(ContractModes, TrivialFullAndPermutation)
{
	oracle::Gen g(18);
	const auto x = g.tensor<double>({2, 3, 2});
	EXPECT_EQ(contract_modes(x, {{1}, {2}, {3}}), x);
	const auto v = contract_modes(x, {{1, 2, 3}});
	ASSERT_EQ(v.dims(), (Dims{12}));
	EXPECT_EQ(v.flat(), vectorize(x));
	const auto y = contract_modes(x, {{3, 1}, {2}});
	ASSERT_EQ(y.dims(), (Dims{4, 3}));
	oracle::for_each_index(x.dims(), [&](const Dims& i) { EXPECT_EQ(y.at({(i[2] - 1) * 2 + i[0], i[1]}), x.at(i)); });
	EXPECT_THROW(contract_modes(x, {{1}, {2}}), PartitionError);
}

TEST(IdentityTensor, DeltaPatternAndUnfolding)
{
	const auto i2 = identity_tensor<double>(2, 3);
	EXPECT_EQ(matricize(i2, {{1}, {2}}), eye<double>(3));
	const auto i3 = identity_tensor<double>(3, 3);
	EXPECT_EQ(unfold(i3, 1), Matrix<double>(oracle::khatri_rao(eye<double>(3), eye<double>(3)).transpose()));
}

TEST(ModeRank, OuterProductIdentityAndParafac)
{
	oracle::Gen g(19);
	const auto u = g.matrix(3, 1), v = g.matrix(4, 1), w = g.matrix(2, 1);
	const auto x = oracle::parafac<double>({u, v, w});
	for (int n = 1; n <= 3; ++n)
		EXPECT_EQ(mode_n_rank(x, n), 1);
	const auto id = identity_tensor<double>(3, 4);
	for (int n = 1; n <= 3; ++n)
		EXPECT_EQ(mode_n_rank(id, n), 4);
	const auto y = oracle::parafac<double>({g.matrix(5, 3), g.matrix(4, 3), g.matrix(6, 3)});
	for (int n = 1; n <= 3; ++n)
		EXPECT_EQ(mode_n_rank(y, n), 3);
}

TEST(DenseTensor, ShapeChecks)
{
	EXPECT_THROW(DenseTensor<double>({2, 0}), ShapeError);
	EXPECT_THROW(DenseTensor<double>(Dims{}), ShapeError);
	EXPECT_THROW(DenseTensor<double>({2, 2}, {1, 2, 3}), ShapeError);
}

// Property: unfolding rows are mode-n vectors and mode products act on them.
TEST(Property, ModeProductUnfoldingAllModesComplex)
{
	oracle::Gen g(20);
	for (int t = 0; t < 20; ++t) {
		const auto x = g.tensor<Complex>(g.dims(4, 1, 3));
		for (int n = 1; n <= 4; ++n) {
			const auto a = g.matrix<Complex>(2, x.dim(n));
			ASSERT_LE(relative_error(unfold(mode_n_product(x, a, n), n), Matrix<Complex>(a * unfold(x, n))), 1e-12);
		}
	}
}
