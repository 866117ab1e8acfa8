#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "fepca/dataset.hpp"
#include "test_support.hpp"

using fepca::Dataset;

namespace {

Dataset small_dataset() {
  Dataset d;
  d.values.resize(4, 3);
  d.values << 1.0, 2.0, 3.0,
              4.0, 5.0, 6.5,
              7.0, 8.5, 9.0,
              1.5, 0.5, 2.5;
  d.row_labels = {"a", "b", "c", "d"};
  d.col_labels = {"x", "y", "z"};
  return d;
}

}  // namespace

TEST_CASE("dataset validation catches shape and content problems") {
  Dataset d = small_dataset();
  CHECK_NOTHROW(d.validate());

  Dataset tiny = d;
  tiny.values = d.values.topRows(2);
  tiny.row_labels = {"a", "b"};
  CHECK_THROWS_AS(tiny.validate(), std::invalid_argument);

  Dataset narrow = d;
  narrow.values = d.values.leftCols(1);
  narrow.col_labels = {"x"};
  CHECK_THROWS_AS(narrow.validate(), std::invalid_argument);

  Dataset mislabeled = d;
  mislabeled.row_labels.pop_back();
  CHECK_THROWS_AS(mislabeled.validate(), std::invalid_argument);

  Dataset with_nan = d;
  with_nan.values(2, 1) = std::nan("");
  try {
    with_nan.validate();
    FAIL("expected a validation error");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("row 3") != std::string::npos);
    CHECK(msg.find("column 2") != std::string::npos);
  }
}

TEST_CASE("preprocess centers columns exactly") {
  const Dataset d = small_dataset();
  const auto [work, pre] = fepca::preprocess(d, false);

  CHECK(pre.scaled == false);
  for (int j = 0; j < d.p(); ++j) {
    CHECK(std::abs(work.col(j).mean()) <= 1e-12);
    CHECK(pre.col_scales(j) == 1.0);
    CHECK(pre.col_means(j) == doctest::Approx(d.values.col(j).mean()).epsilon(1e-14));
  }
}

TEST_CASE("preprocess with scaling gives unit sample variance") {
  const Dataset d = small_dataset();
  const auto [work, pre] = fepca::preprocess(d, true);

  CHECK(pre.scaled == true);
  const int n = d.n();
  for (int j = 0; j < d.p(); ++j) {
    const double var = work.col(j).squaredNorm() / (n - 1);
    CHECK(std::abs(var - 1.0) <= 1e-10);
  }
}

TEST_CASE("scaling a zero-variance column is rejected") {
  Dataset d = small_dataset();
  d.values.col(1).setConstant(3.25);
  CHECK_NOTHROW(fepca::preprocess(d, false));
  CHECK_THROWS_AS(fepca::preprocess(d, true), std::invalid_argument);
}

TEST_CASE("preprocess transform is lossless both ways") {
  fepca::Rng rng(17);
  Dataset d;
  d.values = testsupport::random_matrix(9, 5, rng);
  d.values.array().rowwise() += Eigen::RowVectorXd::LinSpaced(5, -4.0, 12.0).array();
  d.row_labels.assign(9, "r");
  d.col_labels.assign(5, "c");

  for (bool scale : {false, true}) {
    const auto [work, pre] = fepca::preprocess(d, scale);
    const Eigen::MatrixXd restored = pre.undo(work);
    CHECK((restored - d.values).cwiseAbs().maxCoeff() <= 1e-12);
    const Eigen::MatrixXd reapplied = pre.apply(restored);
    CHECK((reapplied - work).cwiseAbs().maxCoeff() <= 1e-12);
  }
}
