import os
import json
import multiprocessing

config_file = "config.json"


def singleton(cls):
    instances = {}

    def get_instance(*args, **kwargs):
        if cls not in instances:
            instances[cls] = cls(*args, **kwargs)
        return instances[cls]

    return get_instance


@singleton
class Config:
    def __init__(self):
        self.json_config = self.load_config_json()
        self.euler_truncation = int(self.json_config["euler_truncation"])
        self.c_sum_max_degree = int(self.json_config["c_sum_max_degree"])
        self.budget_ops = float(self.json_config["budget_ops"])
        self.threads_env = self.json_config["threads_env"]
        self.spot_checks = int(self.json_config["spot_checks"])
        self.shard_size = int(self.json_config["shard_size"])
        self.finite_difference_step = float(self.json_config["finite_difference_step"])
        self.finite_difference_tolerance = float(
            self.json_config["finite_difference_tolerance"]
        )
        self.output_dir = self.json_config["output_dir"]
        self.threads = self.default_threads()

    def load_config_json(self):
        config_path = os.path.join(os.path.dirname(os.path.abspath(__file__)), config_file)
        with open(config_path, "r") as f:
            return json.load(f)

    def default_threads(self):
        value = os.environ.get(self.threads_env)
        if value:
            try:
                threads = int(value)
            except ValueError:
                raise ValueError(
                    f"Environment variable {self.threads_env} must be an integer, got {value!r}."
                )
            if threads < 1:
                raise ValueError(f"{self.threads_env} must be at least 1.")
            return threads
        return multiprocessing.cpu_count()

    def resolve_threads(self, threads=None):
        if threads is None:
            return self.threads
        if threads < 1:
            raise ValueError("Thread count must be at least 1.")
        return threads
