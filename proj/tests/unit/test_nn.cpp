#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "mfsk/errors.hpp"
#include "mfsk/nn.hpp"
#include "gradient_check.hpp"
#include "support.hpp"

using namespace mfsk;

namespace {

Matrix<double> random_matrix(std::mt19937_64& gen, int rows, int cols, double mean = 0.0, double sd = 1.0) {
    std::normal_distribution<double> d(mean, sd);
    Matrix<double> m(rows, cols);
    for (auto& v : m.reshaped()) v = d(gen);
    return m;
}

std::vector<Vector<double>> snapshot(DenseModel<double>& model) {
    std::vector<Vector<double>> out;
    model.for_each_trainable([&](auto flat) { out.emplace_back(flat); });
    return out;
}

}  // namespace

TEST_CASE("parameter accounting of the full architecture") {
    for (auto placement : {BatchNormPlacement::BeforeActivation, BatchNormPlacement::AfterActivation}) {
        Architecture arch;
        arch.placement = placement;
        const auto counts = init_model<float>(1, arch).parameter_counts();
        CHECK(counts.total == 1107904);
        CHECK(counts.trainable == 1098944);
        CHECK(counts.non_trainable == 8960);
        CHECK(counts.dense == 1089984);
        CHECK(counts.batch_norm_trainable == 8960);
        CHECK(counts.batch_norm_non_trainable == 8960);
    }
}

TEST_CASE("layer stack follows the chosen batch-norm placement") {
    auto before = init_model<float>(1, Architecture{16, {8}, 4, BatchNormPlacement::BeforeActivation});
    auto after = init_model<float>(1, Architecture{16, {8}, 4, BatchNormPlacement::AfterActivation});
    REQUIRE(before.layers().size() == 5);
    REQUIRE(after.layers().size() == 5);
    CHECK(std::holds_alternative<BatchNormLayer<float>>(before.layers()[0]));
    CHECK(std::holds_alternative<BatchNormLayer<float>>(before.layers()[2]));
    CHECK(std::holds_alternative<ReluLayer>(before.layers()[3]));
    CHECK(std::holds_alternative<ReluLayer>(after.layers()[2]));
    CHECK(std::holds_alternative<BatchNormLayer<float>>(after.layers()[3]));
    CHECK(std::holds_alternative<DenseLayer<float>>(after.layers()[4]));
}

TEST_CASE("init_model is deterministic and uses the Glorot limit") {
    auto a = init_model<double>(42);
    auto b = init_model<double>(42);
    auto c = init_model<double>(43);
    CHECK(snapshot(a) == snapshot(b));
    CHECK(snapshot(a) != snapshot(c));
    const auto& d = std::get<DenseLayer<double>>(a.layers()[1]);
    const double limit = std::sqrt(6.0 / (4096 + 256));
    CHECK(d.weights.cwiseAbs().maxCoeff() <= limit);
    CHECK(d.weights.cwiseAbs().maxCoeff() > 0.99 * limit);
    CHECK(std::abs(d.weights.mean()) < 1e-3);
    CHECK(d.bias.isZero(0.0));
}

TEST_CASE("constructor rejects layers that do not chain") {
    std::vector<Layer<float>> layers;
    layers.emplace_back(BatchNormLayer<float>(16));
    layers.emplace_back(DenseLayer<float>{Matrix<float>::Zero(8, 15), Vector<float>::Zero(8)});
    CHECK_THROWS_AS(DenseModel<float>(std::move(layers)), ShapeError);
}

TEST_CASE("forward produces probability columns") {
    auto model = init_model<float>(3);
    std::mt19937_64 gen(1);
    const Matrix<float> x = random_matrix(gen, 4096, 5).cast<float>();
    const auto p = model.forward(x);
    CHECK(p.rows() == 64);
    CHECK(p.cols() == 5);
    CHECK((p.array() >= 0.0f).all());
    for (int j = 0; j < 5; ++j) CHECK(std::abs(p.col(j).sum() - 1.0f) < 1e-6f);
    CHECK(model.forward(x) == p);
    CHECK(model.infer(x) == p);

    CHECK_THROWS_AS(model.forward(Matrix<float>::Zero(100, 2)), ShapeError);
    CHECK_THROWS_AS(model.forward(Matrix<float>::Zero(4096, 0)), DomainError);
}

TEST_CASE("zero dense parameters give the uniform distribution") {
    auto model = init_model<double>(3);
    for (auto& layer : model.layers())
        if (auto* d = std::get_if<DenseLayer<double>>(&layer)) {
            d->weights.setZero();
            d->bias.setZero();
        }
    std::mt19937_64 gen(2);
    const auto p = model.forward(random_matrix(gen, 4096, 3));
    CHECK((p.array() - 1.0 / 64).abs().maxCoeff() < 1e-15);
}

TEST_CASE("softmax is shift invariant") {
    std::mt19937_64 gen(5);
    const Matrix<double> z = random_matrix(gen, 64, 7, 0.0, 10.0);
    Matrix<double> shifted = z;
    shifted.rowwise() += Eigen::RowVectorXd::LinSpaced(7, -500.0, 800.0);
    CHECK((softmax<double>(z) - softmax<double>(shifted)).cwiseAbs().maxCoeff() < 1e-9);
    Matrix<double> huge = Matrix<double>::Constant(3, 1, 1e308);
    CHECK(softmax<double>(huge).allFinite());
}

TEST_CASE("cross entropy values") {
    Eigen::VectorXi labels(2);
    labels << 3, 10;
    const auto t = one_hot<double>(labels, 64);
    CHECK(cross_entropy<double>(t, t) == 0.0);
    CHECK(cross_entropy<double>(t, Matrix<double>::Constant(64, 2, 1.0 / 64)) ==
          doctest::Approx(4.15888).epsilon(1e-6));
    Matrix<double> wrong = Matrix<double>::Zero(64, 2);
    wrong(0, 0) = wrong(0, 1) = 1.0;
    CHECK(cross_entropy<double>(t, wrong) == doctest::Approx(-std::log(1e-7)).epsilon(1e-12));
    CHECK(std::isfinite(cross_entropy<double>(t, wrong)));
}

TEST_CASE("one_hot") {
    Eigen::VectorXi labels(3);
    labels << 0, 2, 1;
    const auto t = one_hot<float>(labels, 3);
    Matrix<float> expected = Matrix<float>::Zero(3, 3);
    expected(0, 0) = expected(2, 1) = expected(1, 2) = 1.0f;
    CHECK(t == expected);
    labels(0) = 3;
    CHECK_THROWS(one_hot<float>(labels, 3));
}

TEST_CASE("training-mode batch norm standardizes each feature") {
    std::vector<Layer<double>> layers;
    layers.emplace_back(BatchNormLayer<double>(32));
    DenseModel<double> bn(std::move(layers));
    bn.set_mode(Mode::Training);
    std::mt19937_64 gen(8);
    for (int b : {32, 64, 257}) {
        const Matrix<double> y = bn.logits(random_matrix(gen, 32, b, 3.0, 2.0));
        for (int f = 0; f < 32; ++f) {
            const double mean = y.row(f).mean();
            const double var = (y.row(f).array() - mean).square().mean();
            CHECK(std::abs(mean) < 1e-5);
            CHECK(std::abs(var - 1.0) < 1e-3);
        }
    }
}

TEST_CASE("moving statistics track the batch statistics") {
    std::vector<Layer<double>> layers;
    layers.emplace_back(BatchNormLayer<double>(4));
    DenseModel<double> bn(std::move(layers));
    bn.set_mode(Mode::Training);
    std::mt19937_64 gen(9);
    const Matrix<double> x = random_matrix(gen, 4, 50, 2.0, 3.0);
    bn.logits(x);
    const auto& layer = std::get<BatchNormLayer<double>>(bn.layers()[0]);
    const Vector<double> mean = x.rowwise().mean();
    const Vector<double> var = (x.colwise() - mean).array().square().rowwise().mean();
    CHECK((layer.moving_mean - 0.01 * mean).norm() < 1e-12);
    CHECK((layer.moving_variance - (0.99 * Vector<double>::Ones(4) + 0.01 * var)).norm() < 1e-12);

    // Inference leaves them alone.
    bn.set_mode(Mode::Inference);
    const auto before = layer.moving_mean;
    bn.forward(x);
    CHECK(layer.moving_mean == before);
}

TEST_CASE("analytic gradients match central finite differences") {
    SUBCASE("batch norm before ReLU") { CHECK(test::gradient_check(BatchNormPlacement::BeforeActivation, 11) < 1e-4); }
    SUBCASE("batch norm after ReLU") { CHECK(test::gradient_check(BatchNormPlacement::AfterActivation, 12) < 1e-4); }
}

TEST_CASE("backward contracts") {
    auto model = init_model<double>(4, Architecture{16, {8}, 4});
    std::mt19937_64 gen(4);
    const Matrix<double> x = random_matrix(gen, 16, 6);
    Eigen::VectorXi labels(6);
    labels << 0, 1, 2, 3, 0, 1;
    const auto t = one_hot<double>(labels, 4);

    CHECK_THROWS_AS(model.backward(t), StateError);
    model.forward(x);
    CHECK_THROWS_AS(model.backward(t), StateError);  // inference forward caches nothing

    model.set_mode(Mode::Training);
    const auto p = model.forward(x);
    CHECK_THROWS_AS(model.backward(Matrix<double>::Zero(4, 5)), ShapeError);
    for (const auto& g : model.backward(p).tensors) CHECK(g.cwiseAbs().maxCoeff() < 1e-15);

    // Mean-gradient invariance under duplicating every sample.
    model.forward(x);
    const auto g1 = model.backward(t);
    Matrix<double> x2(16, 12), t2(4, 12);
    x2 << x, x;
    t2 << t, t;
    model.forward(x2);
    const auto g2 = model.backward(t2);
    for (std::size_t k = 0; k < g1.tensors.size(); ++k)
        CHECK((g1.tensors[k] - g2.tensors[k]).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("Adam step") {
    auto model = init_model<double>(5, Architecture{16, {8}, 4});
    auto state = make_adam_state(model, 1e-3);
    const auto start = snapshot(model);

    Gradients<double> zero;
    for (const auto& p : start) zero.tensors.push_back(Vector<double>::Zero(p.size()));
    adam_step(state, model, zero);
    CHECK(state.step == 1);
    CHECK(snapshot(model) == start);

    auto fresh = init_model<double>(5, Architecture{16, {8}, 4});
    auto s1 = make_adam_state(fresh, 1e-3);
    Gradients<double> g;
    for (const auto& p : start) {
        Vector<double> v(p.size());
        for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = (i % 2 ? -1.0 : 1.0) * (0.01 + 0.1 * i);
        g.tensors.push_back(v);
    }
    adam_step(s1, fresh, g);
    const auto after = snapshot(fresh);
    for (std::size_t k = 0; k < after.size(); ++k) {
        const Vector<double> delta = after[k] - start[k];
        for (Eigen::Index i = 0; i < delta.size(); ++i)
            CHECK(std::abs(delta(i) + 1e-3 * (g.tensors[k](i) > 0 ? 1.0 : -1.0)) < 1e-6);
    }

    auto twin = init_model<double>(5, Architecture{16, {8}, 4});
    auto s2 = make_adam_state(twin, 1e-3);
    adam_step(s2, twin, g);
    CHECK(snapshot(twin) == after);

    g.tensors.pop_back();
    CHECK_THROWS_AS(adam_step(s2, twin, g), ShapeError);
    g.tensors.push_back(Vector<double>::Zero(3));
    CHECK_THROWS_AS(adam_step(s2, twin, g), ShapeError);
}

TEST_CASE("Adam leaves moving statistics untouched") {
    auto model = init_model<double>(6, Architecture{16, {8}, 4});
    auto& bn = std::get<BatchNormLayer<double>>(model.layers()[0]);
    bn.moving_mean.setConstant(0.25);
    auto state = make_adam_state(model);
    Gradients<double> g;
    model.for_each_trainable([&](auto flat) { g.tensors.push_back(Vector<double>::Ones(flat.size())); });
    adam_step(state, model, g);
    CHECK((bn.moving_mean.array() == 0.25).all());
    CHECK((bn.moving_variance.array() == 1.0).all());
}

TEST_CASE("model file round trip is bit exact") {
    test::TempDir dir;
    auto model = init_model<float>(7, Architecture{64, {16, 8}, 4, BatchNormPlacement::AfterActivation});
    model.set_mode(Mode::Training);
    std::mt19937_64 gen(7);
    const Matrix<float> x = random_matrix(gen, 64, 10).cast<float>();
    model.forward(x);  // moves the moving statistics off their defaults
    model.set_mode(Mode::Inference);

    save_model(model, dir / "m.nn");
    auto back = load_model(dir / "m.nn");
    REQUIRE(back.layers().size() == model.layers().size());
    for (std::size_t i = 0; i < model.layers().size(); ++i) {
        if (auto* b = std::get_if<BatchNormLayer<float>>(&model.layers()[i])) {
            const auto& c = std::get<BatchNormLayer<float>>(back.layers()[i]);
            CHECK(c.gamma == b->gamma);
            CHECK(c.beta == b->beta);
            CHECK(c.moving_mean == b->moving_mean);
            CHECK(c.moving_variance == b->moving_variance);
        } else if (auto* d = std::get_if<DenseLayer<float>>(&model.layers()[i])) {
            const auto& e = std::get<DenseLayer<float>>(back.layers()[i]);
            CHECK(e.weights == d->weights);
            CHECK(e.bias == d->bias);
        } else {
            CHECK(std::holds_alternative<ReluLayer>(back.layers()[i]));
        }
    }
    CHECK(back.infer(x) == model.infer(x));
    CHECK(back.mode() == Mode::Inference);

    const auto size = std::filesystem::file_size(dir / "m.nn");
    for (std::uintmax_t cut : {std::uintmax_t{3}, std::uintmax_t{20}, size / 2, size - 1}) {
        std::filesystem::copy_file(dir / "m.nn", dir / "t.nn", std::filesystem::copy_options::overwrite_existing);
        std::filesystem::resize_file(dir / "t.nn", cut);
        CHECK_THROWS_AS(load_model(dir / "t.nn"), FormatError);
    }
    {
        std::ofstream out(dir / "junk.nn", std::ios::binary);
        out << "MFSK65DS but not a model at all";
    }
    CHECK_THROWS_AS(load_model(dir / "junk.nn"), FormatError);
    CHECK_THROWS_AS(load_model(dir / "none.nn"), IoError);
}
