#include "test_support.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

using namespace mixlogit;
using namespace mixlogit::testing;

TEST(BundledSpecs, MatchFilesOnDisk)
{
    for (const auto& name : {"paper_cmnl", "paper_ecmnl", "paper_mmnl1", "paper_mmnl2"}) {
        const auto on_disk = read_file(std::string(MIXLOGIT_SOURCE_DIR) + "/specs/" + name + ".spec");
        const auto it = bundled_spec_texts().find(name);
        ASSERT_NE(it, bundled_spec_texts().end()) << name;
        EXPECT_EQ(it->second, on_disk) << name;
    }
}

TEST(BundledSpecs, ParameterCounts)
{
    EXPECT_EQ(count_parameters(load_spec("paper_cmnl")), 27u);
    EXPECT_EQ(count_parameters(load_spec("paper_ecmnl")), 30u);
    EXPECT_EQ(count_parameters(load_spec("paper_mmnl1")), 36u);
    EXPECT_EQ(count_parameters(load_spec("paper_mmnl2")), 39u);
}

TEST(BundledSpecs, Mmnl2Structure)
{
    const auto spec = load_spec("paper_mmnl2");
    EXPECT_EQ(spec.model, ModelClass::MMNL2);
    ASSERT_EQ(spec.blocks.size(), 1u);
    ASSERT_EQ(spec.blocks[0].members.size(), 3u);
    EXPECT_EQ(spec.coefficients[spec.blocks[0].members[0]].name, "time_car");
    EXPECT_EQ(spec.coefficients[spec.blocks[0].members[2]].name, "time_pt");
    EXPECT_EQ(spec.error_components.size(), 3u);
    EXPECT_EQ(spec.draw_dimension(), 9u);
}

TEST(BundledSpecs, RestrictionDropsHeterogeneity)
{
    const auto full = load_spec("paper_mmnl2");
    const auto c = restrict_spec(full, ModelClass::CMNL);
    EXPECT_EQ(count_parameters(c), 27u);
    EXPECT_EQ(ParameterLayout(c).names(), ParameterLayout(load_spec("paper_cmnl")).names());
    for (const auto& p : ParameterLayout(c).params()) {
        EXPECT_NE(p.role, ParamRole::DiagonalScale);
        EXPECT_NE(p.role, ParamRole::ErrorScale);
        EXPECT_NE(p.role, ParamRole::Cholesky);
    }
    EXPECT_EQ(ParameterLayout(restrict_spec(full, ModelClass::ECMNL)).names(),
              ParameterLayout(load_spec("paper_ecmnl")).names());
    EXPECT_EQ(ParameterLayout(restrict_spec(full, ModelClass::MMNL1)).names(),
              ParameterLayout(load_spec("paper_mmnl1")).names());
}

TEST(Parse, AddingRandomCoefficientAddsTwoParameters)
{
    const auto base = load_spec("paper_mmnl1");
    std::string text = base.source_text;
    text.replace(text.find("[error_components]"), 0, "extra: attribute=h_extra applies=housing kind=random\n\n");
    EXPECT_EQ(count_parameters(parse_spec_text(text)), count_parameters(base) + 2);
}

TEST(Parse, Errors)
{
    const std::string head = "model = MMNL2\n[coefficients]\n";
    EXPECT_MIXLOGIT_ERROR(parse_spec_text(head + "a: attribute=h_a applies=housing kind=fixed\n"
                                                 "b: attribute=h_b applies=housing kind=random\n"
                                                 "[blocks]\nblk: members=a,b\n"),
                          ErrorCode::BlockMemberNotRandom);
    EXPECT_MIXLOGIT_ERROR(parse_spec_text("model = CMNL\n[coefficients]\n"), ErrorCode::SyntaxError);
    EXPECT_MIXLOGIT_ERROR(parse_spec_text("model = CMNL\n[coefficients]\na: attribute=h_a applies=housing colour=red\n"),
                          ErrorCode::SyntaxError);
    EXPECT_MIXLOGIT_ERROR(parse_spec_text("model = CMNL\n[coefficients]\na: attribute=x_a applies=housing\n"),
                          ErrorCode::UnknownAttribute);
    EXPECT_MIXLOGIT_ERROR(parse_spec_text("model = CMNL\n[coefficients]\na: attribute=m_t applies=mode:1,2\n"
                                          "b: attribute=m_t applies=mode:2\n"),
                          ErrorCode::DuplicateBinding);
    EXPECT_MIXLOGIT_ERROR(parse_spec_text("model = CMNL\n[coefficients]\na: attribute=h_a applies=housing interact=pets\n"),
                          ErrorCode::UnknownAttribute);
    EXPECT_MIXLOGIT_ERROR(parse_spec_text("model = CMNL\n[coefficients]\na: attribute=h_a applies=housing kind=random\n"),
                          ErrorCode::SyntaxError);
    EXPECT_MIXLOGIT_ERROR(parse_spec_text("[coefficients]\na: attribute=h_a applies=housing\n"), ErrorCode::SyntaxError);
}

TEST(Parse, DisjointModeBindingsAreAllowed)
{
    const auto spec = parse_spec_text("model = CMNL\n[coefficients]\na: attribute=m_t applies=mode:1\n"
                                      "b: attribute=m_t applies=mode:2,3\n");
    EXPECT_EQ(spec.coefficients.size(), 2u);
}

TEST(Parse, SerializedSpecReparses)
{
    for (const auto& name : {"paper_cmnl", "paper_ecmnl", "paper_mmnl1", "paper_mmnl2"}) {
        const auto spec = load_spec(name);
        const auto again = parse_spec_text(to_spec_text(spec));
        EXPECT_EQ(ParameterLayout(again).names(), ParameterLayout(spec).names()) << name;
        EXPECT_EQ(again.model, spec.model);
        for (std::size_t c = 0; c < spec.coefficients.size(); ++c) {
            EXPECT_EQ(again.coefficients[c].transform, spec.coefficients[c].transform);
            EXPECT_EQ(again.coefficients[c].binding.scale, spec.coefficients[c].binding.scale);
            EXPECT_EQ(again.coefficients[c].binding.interactions, spec.coefficients[c].binding.interactions);
        }
    }
}

TEST(Transform, Values)
{
    EXPECT_DOUBLE_EQ(transform_param(Transform::Identity, 1.3), 1.3);
    EXPECT_NEAR(transform_param(Transform::NegativeExponential, -1.9562), -0.14139, 5e-6);
    EXPECT_DOUBLE_EQ(transform_param(Transform::Exponential, 0.0), 1.0);
    for (double a : {-1000.0, -700.0, -1.0, 0.0, 3.0, 700.0, 1000.0})
        EXPECT_LT(transform_param(Transform::NegativeExponential, a), 0.0) << a;
    bool saturated = false;
    EXPECT_TRUE(std::isfinite(transform_param(Transform::Exponential, 1000.0, &saturated)));
    EXPECT_TRUE(saturated);
}

TEST(Realize, DegenerateMixingIgnoresDraws)
{
    const auto spec = load_spec("paper_mmnl2");
    const ParameterLayout layout(spec);
    std::mt19937_64 rng(3);
    auto theta = random_theta(spec, rng);
    for (std::size_t p = 0; p < layout.size(); ++p) {
        const auto role = layout[p].role;
        if (role == ParamRole::DiagonalScale || role == ParamRole::Cholesky || role == ParamRole::ErrorScale) theta[p] = 0;
    }
    std::vector<double> z(spec.draw_dimension());
    std::normal_distribution<double> norm;
    for (int rep = 0; rep < 5; ++rep) {
        for (auto& v : z) v = norm(rng);
        const auto r = realize_coefficients(spec, theta, z);
        for (std::size_t c = 0; c < spec.coefficients.size(); ++c)
            EXPECT_EQ(r.beta[c], transform_param(spec.coefficients[c].transform, theta[layout.value_index(c)]));
        for (double e : r.eta) EXPECT_EQ(e, 0.0);
    }
}

TEST(Realize, CholeskyColumnFromUnitDraw)
{
    const auto spec = load_spec("paper_mmnl2");
    const ParameterLayout layout(spec);
    std::vector<double> theta(layout.size(), 0.0);
    const double L[3][3] = {{1.3038, 0, 0}, {1.1209, 0.2105, 0}, {1.0202, -0.1358, 0.5356}};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j <= i; ++j) theta[layout.cholesky_index(0, i, j)] = L[i][j];
    const auto labels = spec.draw_labels();
    std::vector<double> z(labels.size(), 0.0);
    z[static_cast<std::size_t>(std::find(labels.begin(), labels.end(), "time_car") - labels.begin())] = 1.0;
    const auto r = realize_coefficients(spec, theta, z);
    EXPECT_DOUBLE_EQ(r.alpha[*spec.coefficient_index("time_car")], 1.3038);
    EXPECT_DOUBLE_EQ(r.alpha[*spec.coefficient_index("time_sdc")], 1.1209);
    EXPECT_DOUBLE_EQ(r.alpha[*spec.coefficient_index("time_pt")], 1.0202);

    // Published entries are per quarter hour; the first member's sd per hour is 4 x row norm.
    EXPECT_NEAR(4.0 * std::sqrt(L[0][0] * L[0][0]), 5.2152, 1e-12);
}

TEST(Realize, AffineInDraws)
{
    const auto spec = parse_spec_text(kDenseSpec);
    std::mt19937_64 rng(5);
    const auto theta = random_theta(spec, rng);
    const std::size_t D = spec.draw_dimension();
    std::normal_distribution<double> norm;
    std::vector<double> z1(D), z2(D), mid(D);
    for (std::size_t d = 0; d < D; ++d) {
        z1[d] = norm(rng);
        z2[d] = norm(rng);
        mid[d] = 0.5 * (z1[d] + z2[d]);
    }
    const auto a = realize_coefficients(spec, theta, z1), b = realize_coefficients(spec, theta, z2),
               m = realize_coefficients(spec, theta, mid);
    for (std::size_t c = 0; c < spec.coefficients.size(); ++c)
        EXPECT_NEAR(m.alpha[c], 0.5 * (a.alpha[c] + b.alpha[c]), 1e-12);
    for (std::size_t e = 0; e < m.eta.size(); ++e) EXPECT_NEAR(m.eta[e], 0.5 * (a.eta[e] + b.eta[e]), 1e-12);
    EXPECT_MIXLOGIT_ERROR(realize_coefficients(spec, theta, std::vector<double>(D + 1)), ErrorCode::DimensionMismatch);
}

TEST(Realize, ImpliedCovarianceIsLLtAndColumnSignFree)
{
    const auto spec = load_spec("paper_mmnl2");
    const ParameterLayout layout(spec);
    std::mt19937_64 rng(9);
    auto theta = random_theta(spec, rng);
    auto factor = [&](const std::vector<double>& th) {
        Eigen::Matrix3d L = Eigen::Matrix3d::Zero();
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j <= i; ++j)
                L(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = th[layout.cholesky_index(0, i, j)];
        return L;
    };
    // Empirical covariance of realized block coefficients equals L L^T for
    // the draws e1, e2, e3 and their negatives.
    const auto labels = spec.draw_labels();
    std::array<std::size_t, 3> dims{};
    for (std::size_t i = 0; i < 3; ++i)
        dims[i] = static_cast<std::size_t>(
            std::find(labels.begin(), labels.end(), spec.coefficients[spec.blocks[0].members[i]].name) - labels.begin());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (std::size_t k = 0; k < 3; ++k)
        for (double sgn : {1.0, -1.0}) {
            std::vector<double> z(labels.size(), 0.0);
            z[dims[k]] = sgn;
            const auto r = realize_coefficients(spec, theta, z);
            Eigen::Vector3d dev;
            for (std::size_t i = 0; i < 3; ++i)
                dev[static_cast<Eigen::Index>(i)] =
                    r.alpha[spec.blocks[0].members[i]] - theta[layout.value_index(spec.blocks[0].members[i])];
            cov += 0.5 * dev * dev.transpose();
        }
    const Eigen::Matrix3d L = factor(theta);
    EXPECT_LT((cov - L * L.transpose()).cwiseAbs().maxCoeff(), 1e-12);

    for (std::size_t col = 0; col < 3; ++col) {
        auto flipped = theta;
        for (std::size_t i = col; i < 3; ++i) flipped[layout.cholesky_index(0, i, col)] *= -1.0;
        const Eigen::Matrix3d F = factor(flipped);
        EXPECT_LT((F * F.transpose() - L * L.transpose()).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(Report, CholeskySignNormalization)
{
    const std::vector<std::string> names = {"x", "time.L[1,1]", "time.L[2,1]", "time.L[2,2]", "time.L[3,1]",
                                            "time.L[3,2]", "time.L[3,3]"};
    const std::vector<double> theta = {-2.0, -1.0, 0.5, -0.3, 0.2, 0.4, 0.7};
    const auto out = cholesky_sign_normalized(names, theta);
    EXPECT_EQ(out, (std::vector<double>{-2.0, 1.0, -0.5, 0.3, -0.2, -0.4, 0.7}));
}
