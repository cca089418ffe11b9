__version__ = '0.1.0'
__title__ = 'adtmas'
__description__ = 'Attack-defence tree analysis through multi-agent model checking.'
__url__ = 'https://github.com/njzhaowei/adtmas'
__author__ = 'Zhao Wei'
__author_email__ = 'yewberry@163.com'
__license__ = 'Apache 2.0'
__copyright__ = 'Copyright 2020 Zhao Wei'
