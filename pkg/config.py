import os
from dotenv import load_dotenv

load_dotenv()

class Config:
    """Base configuration class"""
    
    # Runtime
    SPIKE_ENV = os.environ.get('SPIKE_ENV', 'development')
    LOG_LEVEL = os.environ.get('SPIKE_LOG_LEVEL', 'INFO').upper()
    
    # Worker parallelism for preprocessing / tokenization
    THREADS = max(1, int(os.environ.get('SPIKE_THREADS') or 1))
    
    # Numeric precision of parameters and activations; a `dtype` key set in a
    # run config file or by flag takes precedence
    DTYPE = os.environ.get('SPIKE_DTYPE', 'float32')
    
    # Output locations
    OUT_DIR = os.environ.get('SPIKE_OUT_DIR') or \
        os.path.join(os.path.abspath(os.path.dirname(__file__)), 'runs')
    CHECKPOINT_NAME = 'best.spk'
    TRAIN_LOG_NAME = 'train.log'
    RESOLVED_CONFIG_NAME = 'resolved_config.txt'
    
    # Progress bars on interactive terminals
    PROGRESS_BARS = os.environ.get('SPIKE_PROGRESS', 'true').lower() == 'true'
    
    @staticmethod
    def init_runtime(runtime):
        pass

class DevelopmentConfig(Config):
    """Development configuration"""
    LOG_LEVEL = os.environ.get('SPIKE_LOG_LEVEL', 'DEBUG').upper()

class TestingConfig(Config):
    """Testing configuration"""
    DTYPE = 'float64'
    THREADS = 1
    PROGRESS_BARS = False

class ProductionConfig(Config):
    """Production configuration"""
    PROGRESS_BARS = False
    
    @classmethod
    def init_runtime(cls, runtime):
        Config.init_runtime(runtime)
        
        # Runs are written below OUT_DIR; create it up front
        os.makedirs(cls.OUT_DIR, exist_ok=True)

config = {
    'development': DevelopmentConfig,
    'testing': TestingConfig,
    'production': ProductionConfig,
    'default': DevelopmentConfig
}
