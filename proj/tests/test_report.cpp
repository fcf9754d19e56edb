#include <doctest.h>

#include "zzhd/errors.hpp"
#include "zzhd/report.hpp"

using namespace zzhd;

TEST_SUITE("report") {
  TEST_CASE("nearest-rank percentiles") {
    std::vector<double> hundred;
    for (int i = 1; i <= 100; ++i) hundred.push_back(i);
    CHECK(percentile(hundred, 25) == 25.0);
    CHECK(percentile(hundred, 50) == 50.0);
    CHECK(percentile(hundred, 75) == 75.0);
    CHECK(percentile(hundred, 100) == 100.0);
    CHECK(percentile({4, 4, 4}, 25) == 4.0);
    CHECK(percentile({3, 1, 2}, 50) == 2.0);
    CHECK(percentile({7}, 75) == 7.0);
    CHECK_FALSE(percentile({}, 50));
  }

  TEST_CASE("sub-windows are grouped by strict overlap") {
    const std::vector<GroundTruthLabel> labels = {{"a", 100, 200, "malicious"}, {"a", 0, 1000, "benign"},
                                                  {"b", 0, 50, "benign"}};
    CHECK(classify("a", 150, 160, labels) == LossGroup::malicious);
    CHECK(classify("a", 190, 400, labels) == LossGroup::malicious);
    CHECK(classify("a", 200, 400, labels) == LossGroup::benign);
    CHECK(classify("a", 0, 100, labels) == LossGroup::benign);
    CHECK(classify("b", 50, 100, labels) == LossGroup::unlabeled);
    CHECK(classify("c", 0, 100, labels) == LossGroup::unlabeled);
    CHECK(to_string(LossGroup::malicious) == "malicious");
  }

  TEST_CASE("percentile table") {
    const std::vector<GroundTruthLabel> labels = {{"a", 0, 10000, "benign"}, {"m", 3600, 7200, "malicious"}};
    const std::vector<LossRow> rows = {{"a", 0, 1, 10}, {"a", 3600, 2, 20}, {"m", 3600, 100, 5}, {"z", 0, 9, 9}};
    const auto t = percentile_table(rows, labels, 3600);
    REQUIRE(t.size() == 6);
    const std::string csv = format_percentile_csv(t);
    CHECK(csv.rfind("group,vectorization,count,p25,p50,p75\n", 0) == 0);
    CHECK(csv.find("benign,acc,2,1,1,2\n") != std::string::npos);
    CHECK(csv.find("benign,stats,2,10,10,20\n") != std::string::npos);
    CHECK(csv.find("malicious,acc,1,100,100,100\n") != std::string::npos);
    CHECK(csv.find("unlabeled,stats,1,9,9,9\n") != std::string::npos);
    const auto empty = format_percentile_csv(percentile_table({}, labels, 3600));
    CHECK(empty.find("malicious,acc,0,,,\n") != std::string::npos);
  }

  TEST_CASE("label and loss csv round trips") {
    const std::vector<GroundTruthLabel> labels = {{"10.0.0.1", 1569888000, 1569891600, "malicious"},
                                                  {"10.0.0.2", 1569888000, 1569974400, "benign"}};
    CHECK(parse_labels_csv(format_labels_csv(labels)) == labels);
    CHECK_THROWS_AS(parse_labels_csv("src_ip,start_iso,end_iso,label\nx,2019-10-01T00:00:00Z,2019-10-01T00:00:00Z,benign\n"),
                    DataError);
    CHECK_THROWS_AS(parse_labels_csv("src_ip,start_iso,end_iso,label\nx,2019-10-01T00:00:00Z,2019-10-02T00:00:00Z,odd\n"),
                    DataError);
    const std::vector<LossRow> rows = {{"10.0.0.1", 1569888000, 0.1, 1e-300}, {"10.0.0.2", 1569891600, 3e12, 0}};
    CHECK(parse_losses_csv(format_losses_csv(rows)) == rows);
    CHECK_THROWS_AS(parse_losses_csv("src_ip,sub_start_iso,mse_acc,mse_stats\nx,bad,1,2\n"), DataError);
  }

  TEST_CASE("SVG output is well-formed enough to open") {
    const std::vector<LossRow> rows = {{"a", 0, 1, 10}, {"a", 3600, 2, 20}};
    const std::vector<GroundTruthLabel> labels = {{"a", 0, 3600, "malicious"}};
    const std::string loss_svg = render_loss_svg("a", rows, labels, 3600);
    CHECK(loss_svg.rfind("<svg", 0) == 0);
    CHECK(loss_svg.find("</svg>") != std::string::npos);
    const std::vector<Interval> bars = {{0, HalfIndex::at(0), HalfIndex::infinity()},
                                        {1, HalfIndex::from_doubled(1), HalfIndex::at(2)}};
    const std::string bar_svg = render_barcode_svg("a", bars, 4);
    CHECK(bar_svg.rfind("<svg", 0) == 0);
    CHECK(bar_svg.find("</svg>") != std::string::npos);
    CHECK(render_loss_svg("a", {}, {}, 3600).find("</svg>") != std::string::npos);
  }
}
