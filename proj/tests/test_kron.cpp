#include "identities.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace ctd;

namespace {

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

TEST(Kron, SingleOperandAndOracle)
{
	oracle::Gen g(1);
	const auto a = g.matrix(2, 3), b = g.matrix(3, 2);
	EXPECT_EQ(kron(std::vector<Matrix<double>>{a}), a);
	EXPECT_EQ(kron(a, b), oracle::kron(a, b));
	EXPECT_THROW(kron(std::vector<Matrix<double>>{}), ArityError);
}

TEST(Kron, LeftToRightAssociation)
{
	oracle::Gen g(2);
	const auto a = g.matrix(2, 2), b = g.matrix(1, 3), c = g.matrix(2, 1);
	EXPECT_EQ(kron(std::vector<Matrix<double>>{a, b, c}), oracle::kron(oracle::kron(a, b), c));
}

TEST(KhatriRao, ColumnsAreKroneckerOfColumns)
{
	oracle::Gen g(3);
	const auto a = g.matrix(3, 4), b = g.matrix(2, 4);
	const auto k = khatri_rao(a, b);
	EXPECT_EQ(k, oracle::khatri_rao(a, b));
	for (Index r = 0; r < 4; ++r)
		EXPECT_EQ(k.col(r), oracle::kron(Matrix<double>(a.col(r)), Matrix<double>(b.col(r))));
	EXPECT_EQ(khatri_rao(a, ones<double>(1, 4)), a);
	EXPECT_THROW(khatri_rao(a, g.matrix(2, 3)), ShapeError);
}

TEST(KhatriRao, PsiIdentity)
{
	for (Index r1 = 1; r1 <= 5; ++r1)
		for (Index r2 = 1; r2 <= 5; ++r2) {
			const auto p1 = kron(eye<double>(r1), ones<double>(1, r2));
			const auto p2 = kron(ones<double>(1, r1), eye<double>(r2));
			ASSERT_EQ(khatri_rao(p1, p2), eye<double>(r1 * r2));
		}
}

TEST(Hadamard, FrozenAndOnes)
{
	const auto a = mat(2, 2, {1, 2, 3, 4}), b = mat(2, 2, {5, 6, 7, 8});
	EXPECT_EQ(hadamard(std::vector<Matrix<double>>{a, b}), mat(2, 2, {5, 12, 21, 32}));
	EXPECT_EQ(hadamard(std::vector<Matrix<double>>{a, ones<double>(2, 2)}), a);
	EXPECT_THROW(hadamard(std::vector<Matrix<double>>{a, ones<double>(2, 3)}), ShapeError);
}

TEST(VecIdentities, RandomChainIdentityAndPerturbed)
{
	oracle::Gen g(4);
	const auto a = g.matrix(3, 2), c = g.matrix(2, 4), e = g.matrix(4, 3);
	const Vector<double> x = g.vector(2);
	EXPECT_TRUE(vec_identities_check(a, c, e, x));
	EXPECT_TRUE(vec_identities_check<double>(eye<double>(3), eye<double>(3), eye<double>(3), Vector<double>::Ones(3)));
	// perturbing C inside only one side: compare against the stored right side
	const Vector<double> lhs = vec(Matrix<double>(a * c * e));
	Matrix<double> cp = c;
	cp(0, 0) += 1e-3;
	const Vector<double> rhs = kron(Matrix<double>(e.transpose()), a) * vec(cp);
	EXPECT_GT(relative_error(lhs, rhs), 1e-12);
	EXPECT_FALSE(vec_identities_check(a, g.matrix(3, 4), e, x));
}

TEST(VecIdentities, ColumnMajorVec)
{
	const auto m = mat(2, 2, {1, 2, 3, 4});
	EXPECT_EQ(vec(m), (Vector<double>(4) << 1, 3, 2, 4).finished());
}

TEST(BlockKron, SingleBlockIdentityAndOracle)
{
	oracle::Gen g(5);
	const auto a = g.matrix(2, 3), b = g.matrix(3, 2);
	EXPECT_EQ(block_kron<double>({a, {3}}, {b, {2}}).m, kron(a, b));

	const auto id = block_kron<double>({eye<double>(2), {1, 1}}, {eye<double>(2), {1, 1}});
	Matrix<double> expect = Matrix<double>::Zero(4, 2);
	expect(0, 0) = 1;
	expect(3, 1) = 1;
	EXPECT_EQ(id.m, expect);

	const auto pa = g.matrix(2, 6), pb = g.matrix(3, 4);
	const BlockMatrix<double> ba{pa, {1, 2, 3}}, bb{pb, {2, 1, 1}};
	const auto k = block_kron(ba, bb);
	Matrix<double> oracle_m(6, 1 * 2 + 2 * 1 + 3 * 1);
	oracle_m << oracle::kron(Matrix<double>(pa.middleCols(0, 1)), Matrix<double>(pb.middleCols(0, 2))),
	    oracle::kron(Matrix<double>(pa.middleCols(1, 2)), Matrix<double>(pb.middleCols(2, 1))),
	    oracle::kron(Matrix<double>(pa.middleCols(3, 3)), Matrix<double>(pb.middleCols(3, 1)));
	EXPECT_EQ(k.m, oracle_m);
	EXPECT_EQ(k.block_cols, (std::vector<Index>{2, 2, 3}));
	EXPECT_THROW(block_kron(ba, BlockMatrix<double>{pb, {4}}), ShapeError);
	EXPECT_THROW(block_kron(ba, BlockMatrix<double>{pb, {2, 1}}), ShapeError);
}

TEST(BlockKhatriRao, PerBlock)
{
	oracle::Gen g(6);
	const auto pa = g.matrix(2, 3), pb = g.matrix(3, 3);
	const auto k = block_khatri_rao<double>({pa, {1, 2}}, {pb, {1, 2}});
	EXPECT_EQ(k.m, oracle::khatri_rao(pa, pb));
}

TEST(Bdiag, Layout)
{
	const auto d = bdiag<double>({mat(1, 2, {1, 2}), mat(2, 1, {3, 4})});
	EXPECT_EQ(d, mat(3, 3, {1, 2, 0, 0, 0, 3, 0, 0, 4}));
}

TEST(TensorExtension, ReplicateAndTile)
{
	const auto b = mat(2, 2, {1, 2, 3, 4});
	EXPECT_EQ(tensor_extension(b, 1, {2, 3}), mat(2, 6, {1, 1, 1, 2, 2, 2, 3, 3, 3, 4, 4, 4}));
	EXPECT_EQ(tensor_extension(b, 2, {3, 2}), mat(2, 6, {1, 2, 1, 2, 1, 2, 3, 4, 3, 4, 3, 4}));
	EXPECT_THROW(tensor_extension(b, 1, {3, 2}), ShapeError);
	EXPECT_THROW(tensor_extension(b, 3, {2, 2}), ShapeError);
}

TEST(TensorExtension, EntryFormulaAndTwoSided)
{
	oracle::Gen g(7);
	const auto b = g.matrix(3, 2);
	const Dims reps{3, 2, 2};
	const auto a = tensor_extension(b, 2, reps);
	ASSERT_EQ(a.cols(), 12);  // R1 R2 R3 = 3 2 2
	oracle::for_each_index(reps, [&](const Dims& r) {
		const Index col = oracle::group_position(reps, r, {1, 2, 3});
		for (Index i = 0; i < 3; ++i)
			ASSERT_EQ(a(i, col), b(i, r[1] - 1));
	});
	// (1_{MN} kron I_I) B (I_J kron 1^T_{KL})
	const Index m = 2, n = 2, i = 3, j = 2, k = 2, l = 3;
	const auto bb = g.matrix(i, j);
	const auto two = tensor_extension(tensor_extension_rows(bb, 3, {m, n, i}), 1, {j, k, l});
	const Matrix<double> expect =
	    kron(ones<double>(m * n, 1), eye<double>(i)) * bb * kron(eye<double>(j), ones<double>(1, k * l));
	EXPECT_EQ(two, expect);
}

class AppendixIdentity : public ::testing::TestWithParam<int> {};

TEST_P(AppendixIdentity, RealAndComplex)
{
	const auto real = identities::all<double>();
	const auto cplx = identities::all<Complex>();
	const auto k = static_cast<std::size_t>(GetParam());
	oracle::Gen g(100 + GetParam());
	for (int t = 0; t < 50; ++t) {
		ASSERT_LE(real[k].second(g), 1e-12) << real[k].first;
		ASSERT_LE(cplx[k].second(g), 1e-12) << cplx[k].first;
	}
}

INSTANTIATE_TEST_SUITE_P(All, AppendixIdentity, ::testing::Range(0, 8));
