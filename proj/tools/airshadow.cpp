#include "airshadow/cli.hpp"

int main(int argc, char** argv) { return airshadow::dispatch(argc, argv); }
